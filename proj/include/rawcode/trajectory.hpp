#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <optional>
#include <variant>
#include <vector>

#include "rawcode/interval_map.hpp"
#include "rawcode/rng.hpp"

namespace rawcode {

/// Fractional binary digits b_1 .. b_B of a dyadic point in [0,1); digits
/// past B are zero. Either backed by explicit words or generated on demand
/// from a counter-based stream (digit j is bit 63 - (j-1)%64 of output
/// (j-1)/64), so nothing beyond the current word ever has to be stored.
class DyadicBits {
public:
  DyadicBits() = default;

  static DyadicBits seeded(const SeedSpec& seed, size_t bits) {
    DyadicBits d;
    d.key_ = stream_key(seed);
    d.seeded_ = true;
    d.bits_ = bits;
    return d;
  }

  /// Digits of an explicit dyadic x; `bits` defaults to the exponent of x's
  /// denominator and may only extend it.
  static DyadicBits of(const Rational& x, std::optional<size_t> bits = std::nullopt) {
    if (x < 0 || x >= 1) throw DomainError("point " + to_string(x) + " outside [0,1)");
    auto e = dyadic_exponent(x);
    if (!e) throw BackendError("point " + to_string(x) + " is not dyadic");
    const size_t b = bits.value_or(*e);
    if (b < *e) throw PrecisionError("point " + to_string(x) + " needs more than " + std::to_string(b) + " bits");
    DyadicBits d;
    d.bits_ = b;
    // numerator * 2^(64*words - e) laid out big-endian in 64-bit words
    const size_t words = (b + 63) / 64;
    BigInt scaled = x.get_num();
    scaled <<= static_cast<mp_bitcnt_t>(words * 64 - *e);
    auto explicit_words = std::make_shared<std::vector<std::uint64_t>>(words, 0);
    size_t count = 0;
    std::vector<std::uint64_t> little(words + 1, 0);
    mpz_export(little.data(), &count, -1, sizeof(std::uint64_t), 0, 0, scaled.get_mpz_t());
    for (size_t i = 0; i < words; ++i) (*explicit_words)[i] = little[words - 1 - i];
    d.words_ = std::move(explicit_words);
    return d;
  }

  /// Same digits with b_1 forced to `digit` (restricts the point to one half).
  DyadicBits with_first_digit(bool digit) const {
    if (bits_ == 0) throw PrecisionError("cannot force a digit of a zero-bit point");
    DyadicBits d = *this;
    d.force_first_ = digit ? 1 : 0;
    return d;
  }

  size_t bit_count() const noexcept { return bits_; }

  /// Digits 64*i+1 .. 64*i+64, most significant first.
  std::uint64_t word(size_t i) const noexcept {
    if (64 * i >= bits_) return 0;
    std::uint64_t w = seeded_ ? CounterRng::word(key_, i) : (*words_)[i];
    if (i == 0 && force_first_ >= 0) {
      w = (w & ~(std::uint64_t{1} << 63)) | (static_cast<std::uint64_t>(force_first_) << 63);
    }
    const size_t remaining = bits_ - 64 * i;
    if (remaining < 64) w &= ~std::uint64_t{0} << (64 - remaining);
    return w;
  }

  bool digit(size_t j) const noexcept { // 1-based
    return (word((j - 1) / 64) >> (63 - (j - 1) % 64)) & 1U;
  }

  /// Integer formed by digits first..last (1-based, inclusive).
  BigInt digits_as_integer(size_t first, size_t last) const {
    BigInt out = 0;
    if (last < first) return out;
    const size_t w0 = (first - 1) / 64, w1 = (last - 1) / 64;
    for (size_t w = w0; w <= w1; ++w) {
      out <<= 64;
      out += from_u64(word(w));
    }
    out >>= static_cast<mp_bitcnt_t>(64 * (w1 + 1) - last);
    mpz_tdiv_r_2exp(out.get_mpz_t(), out.get_mpz_t(), static_cast<mp_bitcnt_t>(last - first + 1));
    return out;
  }

  Rational value() const {
    if (bits_ == 0) return Rational(0);
    return make_rational(digits_as_integer(1, bits_), BigInt(1) << static_cast<mp_bitcnt_t>(bits_));
  }

private:
  std::shared_ptr<const std::vector<std::uint64_t>> words_;
  std::uint64_t key_ = 0;
  bool seeded_ = false;
  int force_first_ = -1;
  size_t bits_ = 0;
};

/// Dyadic point whose `bits` fractional digits are the leading bits of the
/// seeded stream.
inline Rational sample_initial(const SeedSpec& seed, size_t bits) { return DyadicBits::seeded(seed, bits).value(); }

/// Single-owner cursor over the orbit x, Tx, T^2x, ... of one initial point.
/// All backends are exact; a backend that cannot honour the requested
/// horizon throws instead of returning a degraded value.
class TrajectorySource {
public:
  struct RationalState {
    Rational x;
    std::shared_ptr<const IntervalMap> map;
    void step() { x = (*map)(x); }
  };

  struct ShiftState {
    // x_t = head / 2^64 + (digits 65+t .. B of x0) / 2^(B-t)
    std::uint64_t head = 0;
    DyadicBits bits;
    std::shared_ptr<const std::vector<std::uint64_t>> starts;  // branch starts * 2^64
    std::shared_ptr<const std::vector<std::uint64_t>> offsets; // offsets * 2^64 mod 2^64
    size_t next_digit = 65;                                    // 1-based
    std::uint64_t word = 0;
    size_t word_index = static_cast<size_t>(-1);

    void step() noexcept {
      const size_t wi = (next_digit - 1) >> 6;
      if (wi != word_index) {
        word_index = wi;
        word = bits.word(wi);
      }
      const std::uint64_t nb = (word >> (63 - ((next_digit - 1) & 63))) & 1U;
      ++next_digit;
      const auto& s = *starts;
      size_t br = s.size() - 1;
      while (head < s[br]) --br;
      head = (head << 1) + (*offsets)[br] + nb;
    }
  };

  /// x_t = a / den with a += step (mod den) per iteration; den < 2^126.
  struct Rotation128 {
    u128 a = 0;
    u128 step_size = 0;
    u128 den = 1;
    void step() noexcept {
      a += step_size;
      if (a >= den) a -= den;
    }
  };

  struct RotationBig {
    BigInt a;
    BigInt step_size;
    BigInt den;
    void step() {
      a += step_size;
      if (a >= den) a -= den;
    }
  };

  using State = std::variant<RationalState, ShiftState, Rotation128, RotationBig>;

  /// Orbit of an explicit rational point. For the shift-stream backend the
  /// point must be dyadic; `precision_bits` (default: its exponent) is the
  /// digit budget B, allowing B - 64 steps.
  TrajectorySource(IntervalMap map, const Rational& x0, std::optional<size_t> precision_bits = std::nullopt)
      : map_(std::move(map)) {
    if (x0 < 0 || x0 >= 1) throw DomainError("initial point " + to_string(x0) + " outside [0,1)");
    switch (map_.backend()) {
      case Backend::rational:
        state_ = RationalState{x0, std::make_shared<const IntervalMap>(map_)};
        break;
      case Backend::shift_stream:
        init_shift(DyadicBits::of(x0, precision_bits));
        break;
      case Backend::rotation_closed_form:
        init_rotation(x0);
        break;
    }
  }

  /// Orbit of a dyadic point given by its digit stream (possibly lazy).
  TrajectorySource(IntervalMap map, const DyadicBits& bits) : map_(std::move(map)) {
    if (map_.backend() == Backend::shift_stream) {
      init_shift(bits);
    } else {
      // Other backends need the value itself; the digit budget still bounds the horizon.
      *this = TrajectorySource(map_, bits.value());
      if (bits.bit_count() >= 64) limit_ = std::min(limit_.value_or(SIZE_MAX), bits.bit_count() - 64);
    }
  }

  const IntervalMap& map() const noexcept { return map_; }
  size_t time() const noexcept { return time_; }
  /// Largest time index this source may reach; nullopt when unbounded.
  std::optional<size_t> max_time() const noexcept { return limit_; }

  const State& state() const noexcept { return state_; }

  void advance() {
    check_can_advance(1);
    std::visit([](auto& s) { s.step(); }, state_);
    ++time_;
  }

  void check_can_advance(size_t steps) const {
    if (limit_ && time_ + steps > *limit_) {
      throw PrecisionError("trajectory of '" + map_.name() + "' is exact only up to t = " + std::to_string(*limit_) +
                           "; requested t = " + std::to_string(time_ + steps));
    }
  }

  /// Hands the concrete backend state to `fn`, which must call `step()` on
  /// it exactly `steps` times. Lets callers run tight per-backend loops.
  template <class Fn>
  void step_with(size_t steps, Fn&& fn) {
    check_can_advance(steps);
    std::visit(fn, state_);
    time_ += steps;
  }

  /// Exact current point x_t.
  Rational current() const {
    return std::visit(
        [&](const auto& s) -> Rational {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, RationalState>) {
            return s.x;
          } else if constexpr (std::is_same_v<S, ShiftState>) {
            Rational head = make_rational(from_u64(s.head), BigInt(1) << 64);
            const size_t b = s.bits.bit_count();
            const size_t first = 65 + time_;
            if (first > b) return head;
            BigInt tail = s.bits.digits_as_integer(first, b);
            return head + make_rational(tail, BigInt(1) << static_cast<mp_bitcnt_t>(b - time_));
          } else if constexpr (std::is_same_v<S, Rotation128>) {
            return make_rational(from_u128(s.a), from_u128(s.den));
          } else {
            return make_rational(s.a, s.den);
          }
        },
        state_);
  }

  /// Digits t+1 .. t+64 of x_t (shift-stream backend only).
  std::uint64_t shift_window() const {
    if (auto* s = std::get_if<ShiftState>(&state_)) return s->head;
    throw BackendError("shift_window needs the shift-stream backend");
  }

private:
  void init_shift(const DyadicBits& bits) {
    if (map_.backend() != Backend::shift_stream) throw BackendError("map is not configured for shift-stream");
    ShiftState s;
    s.bits = bits;
    s.head = bits.word(0);
    auto starts = std::make_shared<std::vector<std::uint64_t>>();
    auto offsets = std::make_shared<std::vector<std::uint64_t>>();
    const BigInt two64 = BigInt(1) << 64;
    for (const auto& br : map_.branches()) {
      starts->push_back(static_cast<std::uint64_t>(to_u128(floor_of(br.domain.lo * two64))));
      BigInt off = floor_of(br.offset * two64);
      off %= two64; // mpz % keeps the sign of the dividend
      if (off < 0) off += two64;
      offsets->push_back(static_cast<std::uint64_t>(to_u128(off)));
    }
    s.starts = std::move(starts);
    s.offsets = std::move(offsets);
    limit_ = bits.bit_count() >= 64 ? bits.bit_count() - 64 : 0;
    state_ = std::move(s);
  }

  void init_rotation(const Rational& x0) {
    const Rational& alpha = *map_.rotation_angle();
    BigInt den;
    mpz_lcm(den.get_mpz_t(), x0.get_den_mpz_t(), alpha.get_den_mpz_t());
    BigInt a = x0.get_num() * (den / x0.get_den());
    BigInt step = alpha.get_num() * (den / alpha.get_den());
    if (mpz_sizeinbase(den.get_mpz_t(), 2) <= 126) {
      state_ = Rotation128{to_u128(a), to_u128(step), to_u128(den)};
    } else {
      state_ = RotationBig{a, step, den};
    }
    // Orbits are periodic with period den(alpha); keep t^2 < den(alpha).
    BigInt root;
    mpz_sqrt(root.get_mpz_t(), alpha.get_den_mpz_t());
    limit_ = mpz_fits_ulong_p(root.get_mpz_t()) ? static_cast<size_t>(root.get_ui()) : SIZE_MAX;
  }

  IntervalMap map_;
  State state_;
  size_t time_ = 0;
  std::optional<size_t> limit_;
};

/// (x, Tx, ..., T^(horizon-1) x) under the source's backend, advancing it.
inline std::vector<Rational> iterate(TrajectorySource& source, size_t horizon) {
  if (horizon == 0) throw DomainError("horizon must be positive");
  source.check_can_advance(horizon - 1);
  std::vector<Rational> out;
  out.reserve(horizon);
  out.push_back(source.current());
  for (size_t t = 1; t < horizon; ++t) {
    source.advance();
    out.push_back(source.current());
  }
  return out;
}

/// Deterministic sampling policy for initial points.
///  - shift-stream and rational backends: dyadic point with horizon + 64 digits.
///  - rotation backend: uniform point of the grid (1/q)Z, q = den(alpha).
/// `half` restricts the point to [0,1/2) (false) or [1/2,1) (true).
inline TrajectorySource make_sampled_source(const IntervalMap& map, const SeedSpec& seed, size_t horizon,
                                            std::optional<bool> half = std::nullopt) {
  if (map.backend() == Backend::rotation_closed_form) {
    const Rational& alpha = *map.rotation_angle();
    CounterRng rng(seed);
    Rational x = make_rational(rng.below(BigInt(alpha.get_den())), alpha.get_den());
    if (half) x = x / 2 + (*half ? make_rational(1, 2) : Rational(0));
    return TrajectorySource(map, x);
  }
  DyadicBits bits = DyadicBits::seeded(seed, horizon + 64);
  if (half) bits = bits.with_first_digit(*half);
  return TrajectorySource(map, bits);
}

} // namespace rawcode
