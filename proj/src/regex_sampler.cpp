#include "regex_sampler.hpp"

#include <cctype>
#include <stdexcept>
#include <vector>

namespace stratagen::detail {

struct RegexSampler::Node {
  enum class Kind { Alternation, Sequence, Repeat, CharSet };

  Kind kind = Kind::Sequence;
  std::vector<std::unique_ptr<Node>> children;
  std::size_t min = 1;
  std::size_t max = 1;
  std::string chars;  // CharSet alternatives
};

namespace {

using Node = RegexSampler::Node;

constexpr std::size_t kUnboundedExtra = 4;

std::string printableAscii() {
  std::string s;
  for (char c = 32; c < 127; ++c) s += c;
  return s;
}

std::string classEscape(char c) {
  std::string s;
  switch (c) {
    case 'd':
      for (char d = '0'; d <= '9'; ++d) s += d;
      return s;
    case 'w':
      for (char d = 'a'; d <= 'z'; ++d) s += d;
      for (char d = 'A'; d <= 'Z'; ++d) s += d;
      for (char d = '0'; d <= '9'; ++d) s += d;
      return s + "_";
    case 's':
      return " \t";
    case 'D':
    case 'W':
    case 'S': {
      std::string base = classEscape(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      for (char p : printableAscii()) {
        if (base.find(p) == std::string::npos) s += p;
      }
      return s;
    }
    case 'n': return "\n";
    case 't': return "\t";
    default:
      if (std::isalnum(static_cast<unsigned char>(c))) {
        throw std::invalid_argument(std::string("unsupported escape \\") + c);
      }
      return std::string(1, c);
  }
}

class Builder {
 public:
  explicit Builder(std::string_view p) : p_(p) {}

  std::unique_ptr<Node> build() {
    auto n = alternation();
    if (pos_ != p_.size()) throw std::invalid_argument("unbalanced ')'");
    return n;
  }

 private:
  bool more() const { return pos_ < p_.size(); }
  char peek() const { return p_[pos_]; }

  std::unique_ptr<Node> alternation() {
    auto alt = std::make_unique<Node>();
    alt->kind = Node::Kind::Alternation;
    alt->children.push_back(sequence());
    while (more() && peek() == '|') {
      ++pos_;
      alt->children.push_back(sequence());
    }
    return alt;
  }

  std::unique_ptr<Node> sequence() {
    auto seq = std::make_unique<Node>();
    seq->kind = Node::Kind::Sequence;
    while (more() && peek() != '|' && peek() != ')') {
      if (peek() == '^' || peek() == '$') {
        ++pos_;
        continue;
      }
      auto atomNode = atom();
      seq->children.push_back(quantified(std::move(atomNode)));
    }
    return seq;
  }

  std::size_t number() {
    std::size_t start = pos_;
    std::size_t n = 0;
    while (more() && std::isdigit(static_cast<unsigned char>(peek()))) n = n * 10 + static_cast<std::size_t>(p_[pos_++] - '0');
    if (start == pos_) throw std::invalid_argument("expected repeat count");
    return n;
  }

  std::unique_ptr<Node> quantified(std::unique_ptr<Node> inner) {
    if (!more()) return inner;
    std::size_t lo = 1, hi = 1;
    char c = peek();
    if (c == '*') {
      lo = 0;
      hi = kUnboundedExtra;
      ++pos_;
    } else if (c == '+') {
      lo = 1;
      hi = 1 + kUnboundedExtra;
      ++pos_;
    } else if (c == '?') {
      lo = 0;
      hi = 1;
      ++pos_;
    } else if (c == '{') {
      ++pos_;
      lo = number();
      hi = lo;
      if (more() && peek() == ',') {
        ++pos_;
        hi = (more() && peek() == '}') ? lo + kUnboundedExtra : number();
      }
      if (!more() || peek() != '}') throw std::invalid_argument("unterminated {}");
      ++pos_;
      if (hi < lo) throw std::invalid_argument("bad repeat range");
    } else {
      return inner;
    }
    if (more() && (peek() == '?' || peek() == '+')) ++pos_;  // lazy/possessive: same language
    auto rep = std::make_unique<Node>();
    rep->kind = Node::Kind::Repeat;
    rep->min = lo;
    rep->max = hi;
    rep->children.push_back(std::move(inner));
    return rep;
  }

  std::unique_ptr<Node> charSet(std::string chars) {
    if (chars.empty()) throw std::invalid_argument("empty character class");
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::CharSet;
    n->chars = std::move(chars);
    return n;
  }

  std::unique_ptr<Node> atom() {
    char c = p_[pos_++];
    switch (c) {
      case '(': {
        if (more() && peek() == '?') {
          if (pos_ + 1 < p_.size() && p_[pos_ + 1] == ':') {
            pos_ += 2;
          } else {
            throw std::invalid_argument("lookaround is not supported");
          }
        }
        auto inner = alternation();
        if (!more() || peek() != ')') throw std::invalid_argument("unbalanced '('");
        ++pos_;
        return inner;
      }
      case '[':
        return bracket();
      case '.': {
        std::string any;
        for (char p : printableAscii()) any += p;
        return charSet(any);
      }
      case '\\': {
        if (!more()) throw std::invalid_argument("trailing backslash");
        return charSet(classEscape(p_[pos_++]));
      }
      case '*':
      case '+':
      case '?':
      case '{':
        throw std::invalid_argument("dangling quantifier");
      default:
        return charSet(std::string(1, c));
    }
  }

  std::unique_ptr<Node> bracket() {
    bool negate = false;
    if (more() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    std::string set;
    bool first = true;
    while (more() && (peek() != ']' || first)) {
      first = false;
      char c = p_[pos_++];
      if (c == '\\') {
        if (!more()) throw std::invalid_argument("trailing backslash");
        set += classEscape(p_[pos_++]);
        continue;
      }
      if (pos_ + 1 < p_.size() && peek() == '-' && p_[pos_ + 1] != ']') {
        char hi = p_[pos_ + 1];
        pos_ += 2;
        if (hi < c) throw std::invalid_argument("bad class range");
        for (int x = c; x <= hi; ++x) set += static_cast<char>(x);
        continue;
      }
      set += c;
    }
    if (!more()) throw std::invalid_argument("unterminated class");
    ++pos_;
    if (negate) {
      std::string complement;
      for (char p : printableAscii()) {
        if (set.find(p) == std::string::npos) complement += p;
      }
      set = complement;
    }
    return charSet(set);
  }

  std::string_view p_;
  std::size_t pos_ = 0;
};

void emit(const Node& n, RandomStream& rng, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Alternation:
      emit(*n.children[rng.below(n.children.size())], rng, out);
      return;
    case Node::Kind::Sequence:
      for (const auto& c : n.children) emit(*c, rng, out);
      return;
    case Node::Kind::Repeat: {
      auto count = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(n.min), static_cast<std::int64_t>(n.max)));
      for (std::size_t i = 0; i < count; ++i) emit(*n.children[0], rng, out);
      return;
    }
    case Node::Kind::CharSet:
      out += n.chars[rng.below(n.chars.size())];
      return;
  }
}

}  // namespace

RegexSampler::RegexSampler(std::string_view pattern) : root_(Builder(pattern).build()) {}
RegexSampler::~RegexSampler() = default;
RegexSampler::RegexSampler(RegexSampler&&) noexcept = default;
RegexSampler& RegexSampler::operator=(RegexSampler&&) noexcept = default;

std::string RegexSampler::sample(RandomStream& rng) const {
  std::string out;
  emit(*root_, rng, out);
  return out;
}

}  // namespace stratagen::detail
