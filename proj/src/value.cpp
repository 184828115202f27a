#include "stratagen/value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <regex>

namespace stratagen {

namespace {

constexpr std::array<std::pair<PrimitiveKind, std::string_view>, 9> kKindNames{{
    {PrimitiveKind::Bool, "Bool"},
    {PrimitiveKind::Nat, "Nat"},
    {PrimitiveKind::Int, "Int"},
    {PrimitiveKind::BigNat, "BigNat"},
    {PrimitiveKind::BigInt, "BigInt"},
    {PrimitiveKind::Float, "Float"},
    {PrimitiveKind::String, "String"},
    {PrimitiveKind::UUID, "UUID"},
    {PrimitiveKind::DateTime, "DateTime"},
}};

}  // namespace

std::string_view kindName(PrimitiveKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<PrimitiveKind> kindFromName(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool isIntegral(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Nat:
    case PrimitiveKind::Int:
    case PrimitiveKind::BigNat:
    case PrimitiveKind::BigInt:
      return true;
    default:
      return false;
  }
}

bool isUnsigned(PrimitiveKind kind) {
  return kind == PrimitiveKind::Nat || kind == PrimitiveKind::BigNat;
}

bool isNumeric(PrimitiveKind kind) { return isIntegral(kind) || kind == PrimitiveKind::Float; }

bool isTextual(PrimitiveKind kind) {
  return kind == PrimitiveKind::String || kind == PrimitiveKind::UUID ||
         kind == PrimitiveKind::DateTime;
}

std::string renderValue(const Value& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          std::array<char, 64> buf{};
          auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
          std::string out(buf.data(), end);
          if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
          return out;
        } else {
          return nlohmann::json(v).dump();
        }
      },
      value);
}

bool looksLikeUuid(std::string_view text) {
  static const std::regex re(
      "[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}");
  return std::regex_match(text.begin(), text.end(), re);
}

bool looksLikeDateTime(std::string_view text) {
  // Lenient: date, `T`, then a clock-ish tail. Mock dumps in the wild use
  // forms like `19:34:17:00Z`.
  static const std::regex re("[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}[0-9:.]*(Z|[+-][0-9:]+)?");
  return std::regex_match(text.begin(), text.end(), re);
}

bool valueMatchesKind(const Value& value, PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Bool:
      return std::holds_alternative<bool>(value);
    case PrimitiveKind::Nat:
    case PrimitiveKind::BigNat:
      return std::holds_alternative<std::int64_t>(value) && std::get<std::int64_t>(value) >= 0;
    case PrimitiveKind::Int:
    case PrimitiveKind::BigInt:
      return std::holds_alternative<std::int64_t>(value);
    case PrimitiveKind::Float:
      return std::holds_alternative<double>(value) && std::isfinite(std::get<double>(value));
    case PrimitiveKind::String:
      return std::holds_alternative<std::string>(value);
    case PrimitiveKind::UUID:
      return std::holds_alternative<std::string>(value) &&
             looksLikeUuid(std::get<std::string>(value));
    case PrimitiveKind::DateTime:
      return std::holds_alternative<std::string>(value) &&
             looksLikeDateTime(std::get<std::string>(value));
  }
  return false;
}

nlohmann::ordered_json valueToJson(const Value& value) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, value);
}

std::optional<Value> valueFromJsonUntyped(const nlohmann::ordered_json& json) {
  if (json.is_boolean()) return Value{json.get<bool>()};
  if (json.is_number_integer()) {
    if (json.is_number_unsigned() &&
        json.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      return std::nullopt;
    }
    return Value{json.get<std::int64_t>()};
  }
  if (json.is_number_float()) return Value{json.get<double>()};
  if (json.is_string()) return Value{json.get<std::string>()};
  return std::nullopt;
}

std::optional<Value> valueFromJson(const nlohmann::ordered_json& json, PrimitiveKind kind) {
  auto raw = valueFromJsonUntyped(json);
  if (!raw) return std::nullopt;
  Value v = *raw;
  if (kind == PrimitiveKind::Float && std::holds_alternative<std::int64_t>(v)) {
    v = static_cast<double>(std::get<std::int64_t>(v));
  }
  if (isIntegral(kind) && std::holds_alternative<double>(v)) {
    double d = std::get<double>(v);
    if (std::trunc(d) != d || std::fabs(d) > 9.0e15) return std::nullopt;
    v = static_cast<std::int64_t>(d);
  }
  if (!valueMatchesKind(v, kind)) return std::nullopt;
  return v;
}

}  // namespace stratagen
