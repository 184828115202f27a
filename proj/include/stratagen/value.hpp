#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace stratagen {

enum class PrimitiveKind { Bool, Nat, Int, BigNat, BigInt, Float, String, UUID, DateTime };

std::string_view kindName(PrimitiveKind kind);
std::optional<PrimitiveKind> kindFromName(std::string_view name);

bool isIntegral(PrimitiveKind kind);
bool isUnsigned(PrimitiveKind kind);
bool isNumeric(PrimitiveKind kind);
bool isTextual(PrimitiveKind kind);

/// A primitive value. Integral kinds (including the Big* kinds) are held in
/// 64 bits; textual kinds (String, UUID, DateTime) as text.
using Value = std::variant<bool, std::int64_t, double, std::string>;

/// Canonical text form: `true`/`false`, decimal integers, shortest
/// round-tripping floats, JSON-quoted strings.
std::string renderValue(const Value& value);

/// True iff `value` is a well-formed inhabitant of `kind`.
bool valueMatchesKind(const Value& value, PrimitiveKind kind);

nlohmann::ordered_json valueToJson(const Value& value);

/// Converts a JSON scalar to a value of `kind`. Returns nullopt when the JSON
/// value has the wrong shape or fails the kind's well-formedness check.
std::optional<Value> valueFromJson(const nlohmann::ordered_json& json, PrimitiveKind kind);

/// Decodes a JSON scalar without a target kind (numbers with a fraction or
/// exponent become doubles).
std::optional<Value> valueFromJsonUntyped(const nlohmann::ordered_json& json);

bool looksLikeUuid(std::string_view text);
bool looksLikeDateTime(std::string_view text);

}  // namespace stratagen
