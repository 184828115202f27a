#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "stratagen/rng.hpp"

namespace stratagen::detail {

/// Generates strings from a regular expression by walking its syntax tree.
/// Handles literals, escapes (\d \w \s and escaped punctuation), classes,
/// `.`, groups, alternation and the usual quantifiers. Unbounded repeats are
/// capped a few iterations past their minimum. Backreferences, lookaround and
/// other constructs throw std::invalid_argument; callers fall back to
/// rejection sampling.
class RegexSampler {
 public:
  explicit RegexSampler(std::string_view pattern);
  ~RegexSampler();
  RegexSampler(RegexSampler&&) noexcept;
  RegexSampler& operator=(RegexSampler&&) noexcept;

  std::string sample(RandomStream& rng) const;

  struct Node;

 private:
  std::unique_ptr<Node> root_;
};

}  // namespace stratagen::detail
