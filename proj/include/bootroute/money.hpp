#pragma once

#include <cstdint>
#include <string>

namespace bootroute {

/**
 * Exact decimal currency amount, fixed point with 12 fractional digits.
 *
 * Unit prices are quoted per 10^6 tokens with at most 6 decimal places, so
 * a per-token cost has at most 12 decimal places and `tokens * price` is
 * exact in pico units. Doubles are only produced at the analysis boundary
 * (objective, plots); accounting never rounds until presentation.
 */
class Money {
 public:
  static constexpr std::int64_t kPicoPerUnit = 1'000'000'000'000LL;
  static constexpr std::int64_t kPicoPerMicro = 1'000'000LL;

  constexpr Money() = default;

  static constexpr Money from_pico(std::int64_t pico) { return Money(pico); }
  static Money from_micro(std::int64_t micro);
  static Money from_units(std::int64_t units);

  // Parses a plain decimal string ("1.10", "0.0011"). Rejects more than
  // 6 fractional digits: unit prices are defined at micro resolution.
  static Money parse(const std::string& text);

  // Rounds a double to micro resolution (used for JSON number inputs).
  static Money from_double_micro(double value);

  constexpr std::int64_t pico() const { return pico_; }
  double to_double() const { return static_cast<double>(pico_) / kPicoPerUnit; }
  bool is_negative() const { return pico_ < 0; }

  // Must be an exact multiple of 10^6 pico; true for any parsed price.
  std::int64_t micro() const;

  // Fixed 6-place decimal string, e.g. "0.001100". Rounds half away from
  // zero at the 6th place; this is the only place accounting rounds.
  std::string to_string() const;

  Money& operator+=(Money other);
  friend Money operator+(Money a, Money b) { return a += b; }
  friend constexpr bool operator==(Money a, Money b) { return a.pico_ == b.pico_; }
  friend constexpr auto operator<=>(Money a, Money b) { return a.pico_ <=> b.pico_; }

  // tokens * (price per 10^6 tokens) / 10^6, exact. `price` must carry at
  // most 6 decimal places (enforced at parse time).
  static Money cost_for_tokens(std::int64_t tokens, Money price_per_million);

  // Exact integer division by a positive count, rounding half away from zero
  // at pico resolution (per-query means in reports).
  Money divided_by(std::int64_t count) const;

 private:
  constexpr explicit Money(std::int64_t pico) : pico_(pico) {}
  std::int64_t pico_ = 0;
};

}  // namespace bootroute
