#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rawcode/interval_set.hpp"

namespace rawcode {

/// How trajectories of a map are produced.
///  - rational: exact iteration of the affine branches on arbitrary rationals.
///  - shift_stream: slope-2 maps with dyadic coefficients acting on dyadic
///    points; the orbit is a sliding 64-bit head over the initial point's bit
///    stream, O(1) per step.
///  - rotation_closed_form: x_t = (a + t*P mod D) / D over a fixed integer
///    denominator D.
enum class Backend { rational, shift_stream, rotation_closed_form };

inline const char* to_string(Backend b) {
  switch (b) {
    case Backend::rational: return "rational";
    case Backend::shift_stream: return "shift-stream";
    case Backend::rotation_closed_form: return "rotation-closed-form";
  }
  return "?";
}

/// One affine piece x -> slope * x + offset on [domain.lo, domain.hi).
struct Branch {
  Interval domain;
  Rational slope;
  Rational offset;

  Rational apply(const Rational& x) const { return slope * x + offset; }
  Interval image() const { return {apply(domain.lo), apply(domain.hi)}; }
};

/// Piecewise-affine self-map of [0,1). Immutable; copies share storage.
class IntervalMap {
public:
  IntervalMap(std::string name, std::vector<Branch> branches, Backend backend,
              std::optional<Rational> rotation_angle = std::nullopt) {
    auto data = std::make_shared<Data>(Data{std::move(name), std::move(branches), backend, std::move(rotation_angle)});
    validate(*data);
    data_ = std::move(data);
  }

  const std::string& name() const noexcept { return data_->name; }
  const std::vector<Branch>& branches() const noexcept { return data_->branches; }
  Backend backend() const noexcept { return data_->backend; }
  /// The angle alpha for rotations x -> x + alpha mod 1.
  const std::optional<Rational>& rotation_angle() const noexcept { return data_->angle; }

  /// Same branches, different backend (validated again).
  IntervalMap with_backend(Backend backend) const {
    return IntervalMap(name(), branches(), backend, rotation_angle());
  }

  size_t branch_index(const Rational& x) const {
    if (x < 0 || x >= 1) throw DomainError("point " + to_string(x) + " outside [0,1)");
    const auto& bs = branches();
    auto it = std::upper_bound(bs.begin(), bs.end(), x,
                               [](const Rational& v, const Branch& b) { return v < b.domain.lo; });
    return static_cast<size_t>(std::prev(it) - bs.begin());
  }

  Rational operator()(const Rational& x) const { return branches()[branch_index(x)].apply(x); }

private:
  struct Data {
    std::string name;
    std::vector<Branch> branches;
    Backend backend;
    std::optional<Rational> angle;
  };

  static void validate(Data& data) {
    auto& bs = data.branches;
    const std::string& name = data.name;
    if (bs.empty()) throw InputError("map '" + name + "' has no branches");
    std::sort(bs.begin(), bs.end(), [](const Branch& a, const Branch& b) { return a.domain.lo < b.domain.lo; });
    Rational cursor = 0;
    for (const auto& b : bs) {
      if (b.domain.lo != cursor) throw InputError("branch domains of '" + name + "' do not tile [0,1)");
      if (b.domain.empty()) throw InputError("empty branch domain in '" + name + "'");
      if (b.slope <= 0) throw InputError("non-positive slope in '" + name + "'");
      const Interval img = b.image();
      if (img.lo < 0 || img.hi > 1)
        throw InputError("branch image " + to_string(img) + " of '" + name + "' leaves [0,1)");
      cursor = b.domain.hi;
    }
    if (cursor != 1) throw InputError("branch domains of '" + name + "' do not cover [0,1)");

    switch (data.backend) {
      case Backend::rational: break;
      case Backend::shift_stream:
        for (const auto& b : bs) {
          auto fits = [](const Rational& r) {
            auto e = dyadic_exponent(r);
            return e && *e <= 64;
          };
          if (b.slope != 2 || !fits(b.offset) || !fits(b.domain.lo) || !fits(b.domain.hi))
            throw BackendError("shift-stream backend needs slope 2 and dyadic coefficients (2^-64 grid); '" +
                               name + "' does not qualify");
        }
        break;
      case Backend::rotation_closed_form: {
        const auto& a = data.angle;
        if (!a || *a <= 0 || *a >= 1)
          throw BackendError("rotation backend needs an angle in (0,1) for '" + name + "'");
        for (const auto& b : bs) {
          if (b.slope != 1) throw BackendError("rotation backend needs slope 1 branches");
          if (b.offset != *a && b.offset != *a - 1) throw BackendError("branch offset disagrees with rotation angle");
          if (b.offset == *a && b.domain.hi > 1 - *a) throw BackendError("rotation branches misplaced");
        }
        break;
      }
    }
  }

  std::shared_ptr<const Data> data_;
};

/// T(x) for x in [0,1); throws DomainError outside.
inline Rational eval_map(const IntervalMap& map, const Rational& x) { return map(x); }

/// Doubling map x -> 2x mod 1.
inline IntervalMap make_doubling_map(Backend backend = Backend::shift_stream) {
  const Rational half = make_rational(1, 2);
  return IntervalMap("doubling",
                     {Branch{{Rational(0), half}, Rational(2), Rational(0)},
                      Branch{{half, Rational(1)}, Rational(2), Rational(-1)}},
                     backend);
}

/// Two-component map: 2x on [0,1/4), 2x-1/2 on [1/4,3/4), 2x-1 on [3/4,1).
/// Both halves [0,1/2) and [1/2,1) are invariant; 1/2 is a fixed point.
/// On binary expansions it keeps the first digit and drops the second.
inline IntervalMap make_bridge_map(Backend backend = Backend::shift_stream) {
  const Rational q = make_rational(1, 4), h = make_rational(1, 2), tq = make_rational(3, 4);
  return IntervalMap("bridge",
                     {Branch{{Rational(0), q}, Rational(2), Rational(0)},
                      Branch{{q, tq}, Rational(2), Rational(-h)},
                      Branch{{tq, Rational(1)}, Rational(2), Rational(-1)}},
                     backend);
}

/// Continued-fraction convergent F(n-1)/F(n) of the golden-section angle
/// (sqrt(5)-1)/2, with F(n) the first Fibonacci number >= 2^precision_bits.
inline Rational golden_convergent(unsigned precision_bits) {
  BigInt target = 1;
  target <<= precision_bits;
  BigInt prev = 1, cur = 1;
  while (cur < target) {
    BigInt next = prev + cur;
    prev = cur;
    cur = next;
  }
  return make_rational(prev, cur);
}

/// Rotation x -> x + alpha mod 1 for an explicit angle in (0,1).
inline IntervalMap make_rotation_with_angle(const Rational& alpha,
                                            Backend backend = Backend::rotation_closed_form) {
  if (alpha <= 0 || alpha >= 1) throw DomainError("rotation angle must lie in (0,1)");
  return IntervalMap("rotation",
                     {Branch{{Rational(0), Rational(1 - alpha)}, Rational(1), alpha},
                      Branch{{Rational(1 - alpha), Rational(1)}, Rational(1), Rational(alpha - 1)}},
                     backend, alpha);
}

/// Golden rotation. The angle is a rational convergent with denominator
/// q >= 2^precision_bits, so orbits are periodic with period q; horizons must
/// stay below sqrt(q).
inline IntervalMap make_rotation(unsigned precision_bits = 64, Backend backend = Backend::rotation_closed_form) {
  if (precision_bits < 64) throw DomainError("rotation precision must be at least 64 bits");
  return make_rotation_with_angle(golden_convergent(precision_bits), backend);
}

} // namespace rawcode
