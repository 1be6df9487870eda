#include "bootroute/money.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bootroute {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error("currency accumulation overflow");
  }
  return out;
}

}  // namespace

Money Money::from_micro(std::int64_t micro) {
  std::int64_t pico = 0;
  if (__builtin_mul_overflow(micro, kPicoPerMicro, &pico)) {
    throw std::overflow_error("currency amount overflow");
  }
  return Money(pico);
}

Money Money::from_units(std::int64_t units) {
  std::int64_t pico = 0;
  if (__builtin_mul_overflow(units, kPicoPerUnit, &pico)) {
    throw std::overflow_error("currency amount overflow");
  }
  return Money(pico);
}

Money Money::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty currency literal");
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++digits) {
    whole = whole * 10 + (text[i] - '0');
    if (whole > 9'000'000) throw std::out_of_range("currency literal too large: " + text);
  }
  std::int64_t frac_micro = 0;
  std::size_t frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      if (++frac_digits > 6) {
        throw std::invalid_argument("currency literal has more than 6 decimal places: " + text);
      }
      frac_micro = frac_micro * 10 + (text[i] - '0');
    }
  }
  if (i != text.size() || (digits == 0 && frac_digits == 0)) {
    throw std::invalid_argument("malformed currency literal: " + text);
  }
  for (std::size_t d = frac_digits; d < 6; ++d) frac_micro *= 10;
  std::int64_t micro = whole * 1'000'000 + frac_micro;
  return from_micro(negative ? -micro : micro);
}

Money Money::from_double_micro(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite currency value");
  double micro = value * 1e6;
  if (std::abs(micro) > 9.0e12) throw std::out_of_range("currency value too large");
  return from_micro(static_cast<std::int64_t>(std::llround(micro)));
}

std::int64_t Money::micro() const {
  return pico_ / kPicoPerMicro;
}

std::string Money::to_string() const {
  std::int64_t pico = pico_;
  bool negative = pico < 0;
  if (negative) pico = -pico;
  // round half away from zero to micro resolution
  std::int64_t micro = (pico + kPicoPerMicro / 2) / kPicoPerMicro;
  std::int64_t units = micro / 1'000'000;
  std::int64_t frac = micro % 1'000'000;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%lld.%06lld", negative ? "-" : "",
                static_cast<long long>(units), static_cast<long long>(frac));
  return buf;
}

Money& Money::operator+=(Money other) {
  pico_ = checked_add(pico_, other.pico_);
  return *this;
}

Money Money::cost_for_tokens(std::int64_t tokens, Money price_per_million) {
  if (tokens < 0) throw std::invalid_argument("negative token count");
  if (price_per_million.pico_ % kPicoPerMicro != 0) {
    throw std::invalid_argument("unit price finer than 6 decimal places");
  }
  std::int64_t price_micro = price_per_million.pico_ / kPicoPerMicro;
  __int128 pico = static_cast<__int128>(tokens) * price_micro;
  if (pico > INT64_MAX || pico < INT64_MIN) {
    throw std::overflow_error("currency cost overflow");
  }
  return Money(static_cast<std::int64_t>(pico));
}

Money Money::divided_by(std::int64_t count) const {
  if (count <= 0) throw std::invalid_argument("division by non-positive count");
  std::int64_t pico = pico_;
  bool negative = pico < 0;
  if (negative) pico = -pico;
  std::int64_t q = (pico + count / 2) / count;
  return Money(negative ? -q : q);
}

}  // namespace bootroute
