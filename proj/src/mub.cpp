#include "tbf/mub.hpp"

#include <cmath>
#include <sstream>

namespace tbf {
namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Polynomials over GF(p) as little-endian coefficient vectors.
using Poly = std::vector<std::size_t>;

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

// Remainder of a modulo monic b over GF(p).
Poly poly_mod(Poly a, const Poly& b, std::size_t p) {
  trim(a);
  const std::size_t db = b.size() - 1;
  while (a.size() >= b.size()) {
    const std::size_t lead = a.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i <= db; ++i) a[shift + i] = (a[shift + i] + p * p - lead * b[i] % p) % p;
    trim(a);
  }
  return a;
}

Poly decode(std::size_t index, std::size_t p, std::size_t k) {
  Poly c(k);
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = index % p;
    index /= p;
  }
  return c;
}

bool irreducible(const Poly& f, std::size_t p) {
  const std::size_t deg = f.size() - 1;
  for (std::size_t dg = 1; dg <= deg / 2; ++dg) {
    const std::size_t count = ipow(p, dg);
    for (std::size_t low = 0; low < count; ++low) {
      Poly g = decode(low, p, dg);
      g.push_back(1);
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

// Arithmetic in GF(p^k) with elements encoded as integers in base p.
class GaloisField {
 public:
  GaloisField(std::size_t p, std::size_t k) : p_(p), k_(k), order_(ipow(p, k)) {
    if (k == 1) {
      modulus_ = {0, 1};
    } else {
      for (std::size_t low = 0; low < order_; ++low) {
        Poly f = decode(low, p, k);
        f.push_back(1);
        if (irreducible(f, p)) {
          modulus_ = std::move(f);
          break;
        }
      }
    }
  }

  std::size_t order() const { return order_; }

  std::size_t add(std::size_t a, std::size_t b) const {
    Poly x = decode(a, p_, k_), y = decode(b, p_, k_);
    for (std::size_t i = 0; i < k_; ++i) x[i] = (x[i] + y[i]) % p_;
    return encode(x);
  }

  std::size_t mul(std::size_t a, std::size_t b) const {
    const Poly x = decode(a, p_, k_), y = decode(b, p_, k_);
    Poly prod(2 * k_, 0);
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % p_;
    return encode(poly_mod(prod, modulus_, p_));
  }

  // Absolute trace x + x^p + ... + x^(p^(k-1)), an element of GF(p).
  std::size_t trace(std::size_t a) const {
    std::size_t sum = 0;
    std::size_t term = a;
    for (std::size_t i = 0; i < k_; ++i) {
      sum = add(sum, term);
      std::size_t power = 1;
      for (std::size_t j = 0; j < p_; ++j) power = mul(power, term);
      term = power;
    }
    return sum;  // constant polynomial, encoded as its own value
  }

 private:
  std::size_t encode(const Poly& c) const {
    std::size_t v = 0;
    for (std::size_t i = c.size(); i-- > 0;)
      if (i < k_) v = v * p_ + c[i];
    return v;
  }

  std::size_t p_;
  std::size_t k_;
  std::size_t order_;
  Poly modulus_;
};

StateVector from_phases(const std::vector<Complex>& amps) {
  StateVector s;
  s.amplitudes = CVector(static_cast<Eigen::Index>(amps.size()));
  const double norm = 1.0 / std::sqrt(static_cast<double>(amps.size()));
  for (std::size_t t = 0; t < amps.size(); ++t) s.amplitudes(static_cast<Eigen::Index>(t)) = amps[t] * norm;
  return s;
}

Complex root_of_unity(std::size_t exponent, std::size_t order) {
  const std::size_t r = exponent % order;
  // Exact values on the axes keep d = 2, 4 states free of rounding noise.
  if ((4 * r) % order == 0) {
    switch ((4 * r) / order) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(order));
}

MubFamily galois_family(std::size_t p, std::size_t k) {
  const GaloisField field(p, k);
  const std::size_t d = field.order();
  MubFamily fam;
  fam.dim = d;
  fam.includes_computational = true;
  MubBasis comp{"computational", {}};
  for (std::size_t a = 0; a < d; ++a) comp.states.push_back(computational_state(d, a));
  fam.bases.push_back(std::move(comp));

  for (std::size_t mu = 0; mu < d; ++mu) {
    MubBasis basis{"mu=" + std::to_string(mu), {}};
    if (p == 2) {
      // Stabilizer states i^(t^T M t) (-1)^(c.t) with M_ij = Tr(mu e_i e_j).
      std::vector<std::vector<std::size_t>> m(k, std::vector<std::size_t>(k));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          m[i][j] = field.trace(field.mul(mu, field.mul(std::size_t{1} << i, std::size_t{1} << j)));
      for (std::size_t c = 0; c < d; ++c) {
        std::vector<Complex> amps(d);
        for (std::size_t t = 0; t < d; ++t) {
          std::size_t quad = 0;
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) quad += m[i][j] * ((t >> i) & 1U) * ((t >> j) & 1U);
          const std::size_t parity = static_cast<std::size_t>(__builtin_popcountll(c & t)) & 1U;
          amps[t] = root_of_unity(quad + 2 * parity, 4);
        }
        basis.states.push_back(from_phases(amps));
      }
    } else {
      for (std::size_t a = 0; a < d; ++a) {
        std::vector<Complex> amps(d);
        for (std::size_t t = 0; t < d; ++t) {
          const std::size_t arg = field.add(field.mul(mu, field.mul(t, t)), field.mul(a, t));
          amps[t] = root_of_unity(field.trace(arg), p);
        }
        basis.states.push_back(from_phases(amps));
      }
    }
    fam.bases.push_back(std::move(basis));
  }
  return fam;
}

}  // namespace

bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

std::optional<std::pair<std::size_t, std::size_t>> prime_power(std::size_t d) {
  if (d < 2) return std::nullopt;
  std::size_t p = 2;
  while (d % p != 0) ++p;
  std::size_t k = 0;
  while (d % p == 0) {
    d /= p;
    ++k;
  }
  if (d != 1) return std::nullopt;
  return std::make_pair(p, k);
}

StateVector quadratic_phase_state(std::size_t d, std::size_t mu, std::size_t a) {
  if (d < 2) throw DomainError("dimension must be at least 2");
  std::vector<Complex> amps(d);
  for (std::size_t t = 0; t < d; ++t) amps[t] = root_of_unity((a * t + mu * t * t) % d, d);
  return from_phases(amps);
}

StateVector mub_state(std::size_t d, std::size_t mu, std::size_t a) {
  if (!is_prime(d)) {
    std::ostringstream msg;
    msg << "quadratic-phase MUB states need prime d (got " << d
        << "); use mub_family for prime-power dimensions";
    throw DomainError(msg.str());
  }
  if (mu >= d || a >= d) throw DomainError("MUB indices must lie in [0, d-1]");
  if (d == 2) {
    std::vector<Complex> amps{{1.0, 0.0}, root_of_unity(mu + 2 * a, 4)};
    return from_phases(amps);
  }
  return quadratic_phase_state(d, mu, a);
}

StateVector computational_state(std::size_t d, std::size_t a) {
  if (a >= d) throw DomainError("computational index out of range");
  StateVector s;
  s.amplitudes = CVector::Zero(static_cast<Eigen::Index>(d));
  s.amplitudes(static_cast<Eigen::Index>(a)) = 1.0;
  return s;
}

MubFamily mub_family(std::size_t d) {
  const auto pk = prime_power(d);
  if (!pk) {
    std::ostringstream msg;
    msg << "no MUB construction for d = " << d << " (needs a prime power)";
    throw DomainError(msg.str());
  }
  if (pk->second > 1) return galois_family(pk->first, pk->second);

  MubFamily fam;
  fam.dim = d;
  fam.includes_computational = true;
  MubBasis comp{"computational", {}};
  for (std::size_t a = 0; a < d; ++a) comp.states.push_back(computational_state(d, a));
  fam.bases.push_back(std::move(comp));
  for (std::size_t mu = 0; mu < d; ++mu) {
    MubBasis basis{"mu=" + std::to_string(mu), {}};
    for (std::size_t a = 0; a < d; ++a) basis.states.push_back(mub_state(d, mu, a));
    fam.bases.push_back(std::move(basis));
  }
  return fam;
}

UnbiasednessReport verify_unbiased(const MubFamily& family) {
  UnbiasednessReport r;
  const double d = static_cast<double>(family.dim);
  for (std::size_t b1 = 0; b1 < family.bases.size(); ++b1) {
    const auto& s1 = family.bases[b1].states;
    for (std::size_t i = 0; i < s1.size(); ++i)
      for (std::size_t j = 0; j < s1.size(); ++j) {
        const Complex g = s1[i].amplitudes.dot(s1[j].amplitudes);
        r.max_gram_defect = std::max(r.max_gram_defect, std::abs(g - Complex(i == j ? 1.0 : 0.0)));
      }
    for (std::size_t b2 = b1 + 1; b2 < family.bases.size(); ++b2)
      for (const auto& x : s1)
        for (const auto& y : family.bases[b2].states)
          r.max_overlap_defect =
              std::max(r.max_overlap_defect, std::abs(d * std::norm(x.amplitudes.dot(y.amplitudes)) - 1.0));
  }
  return r;
}

}  // namespace tbf
