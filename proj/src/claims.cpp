#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "ea/reasoning_validator.hpp"

namespace ea {

namespace {

enum class Tok { word, number, percent, punct };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  int decimals = 0;
};

bool word_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (word_start(c)) {
      std::size_t j = i;
      std::string w;
      while (j < n && (word_char(static_cast<unsigned char>(text[j])) ||
                       (text[j] == '-' && j + 1 < n && std::isalpha(static_cast<unsigned char>(text[j + 1]))))) {
        w += static_cast<char>(std::tolower(static_cast<unsigned char>(text[j])));
        ++j;
      }
      out.push_back({Tok::word, std::move(w)});
      i = j;
    } else if (std::isdigit(c) || (c == '-' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
                                   (out.empty() || out.back().kind != Tok::number))) {
      std::size_t j = i + (c == '-' ? 1 : 0);
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      int decimals = 0;
      if (j + 1 < n && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        std::size_t k = j + 1;
        while (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
        decimals = static_cast<int>(k - j - 1);
        j = k;
      }
      Token t{Tok::number, std::string(text.substr(i, j - i))};
      t.decimals = decimals;
      std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      out.push_back(std::move(t));
      i = j;
    } else if (c == '%') {
      out.push_back({Tok::percent, "%"});
      ++i;
    } else if (c < 0x80) {
      out.push_back({Tok::punct, std::string(1, static_cast<char>(c))});
      ++i;
    } else {
      ++i;  // non-ASCII bytes are ignored
    }
  }
  return out;
}

bool sentence_break(const Token& t) {
  return t.kind == Tok::punct && (t.text == "." || t.text == ";" || t.text == "!" || t.text == "?");
}

bool is_word(const std::vector<Token>& s, std::size_t i, std::string_view w) {
  return i < s.size() && s[i].kind == Tok::word && s[i].text == w;
}

template <std::size_t N>
bool is_any(const std::vector<Token>& s, std::size_t i, const std::array<std::string_view, N>& words) {
  if (i >= s.size() || s[i].kind != Tok::word) return false;
  return std::find(words.begin(), words.end(), s[i].text) != words.end();
}

bool is_plain_number(const std::vector<Token>& s, std::size_t i) {
  return i < s.size() && s[i].kind == Tok::number && !(i + 1 < s.size() && s[i + 1].kind == Tok::percent);
}

constexpr std::array<std::string_view, 4> kUp{"increased", "rose", "grew", "climbed"};
constexpr std::array<std::string_view, 5> kDown{"decreased", "dropped", "fell", "declined", "shrank"};
constexpr std::array<std::string_view, 1> kBetter{"improved"};
constexpr std::array<std::string_view, 3> kWorse{"worsened", "degraded", "deteriorated"};

int direction_of(const std::vector<Token>& s, std::size_t i) {
  if (is_any(s, i, kUp)) return 1;
  if (is_any(s, i, kDown)) return -1;
  if (is_any(s, i, kBetter)) return 2;
  if (is_any(s, i, kWorse)) return -2;
  return 0;
}

void match_derivations(const std::vector<Token>& s, std::vector<Claim>& out) {
  for (std::size_t i = 1; i + 4 < s.size(); ++i) {
    const int dir = direction_of(s, i);
    if (dir == 0 || s[i - 1].kind != Tok::word) continue;
    if (!is_word(s, i + 1, "from") || !is_plain_number(s, i + 2) || !is_word(s, i + 3, "to") ||
        !is_plain_number(s, i + 4))
      continue;
    Claim c;
    c.kind = ClaimKind::numeric_derivation;
    c.subject = s[i - 1].text;
    c.direction = dir;
    c.from_value = s[i + 2].value;
    c.to_value = s[i + 4].value;
    for (std::size_t k = i + 5; k + 2 < s.size(); ++k) {
      if (s[k].kind == Tok::number && s[k + 1].kind == Tok::percent && is_word(s, k + 2, "relative")) {
        c.claimed_delta_pct = s[k].value;
        c.decimals = s[k].decimals;
        const std::string sense = k + 3 < s.size() && s[k + 3].kind == Tok::word ? s[k + 3].text : "";
        if (sense == "increase" || sense == "gain" || sense == "rise") {
          c.delta_sense = "increase";
        } else if (sense == "reduction" || sense == "decrease" || sense == "drop" || sense == "decline") {
          c.delta_sense = "reduction";
        } else {
          c.delta_sense = "improvement";
        }
        break;
      }
    }
    out.push_back(std::move(c));
  }
}

constexpr std::array<std::string_view, 4> kHave{"has", "contains", "with", "have"};
constexpr std::array<std::string_view, 5> kRowNouns{"rows", "samples", "records", "observations", "instances"};
constexpr std::array<std::string_view, 3> kColNouns{"columns", "features", "attributes"};
constexpr std::array<std::string_view, 6> kIs{"was", "is", "equals", "reached", "of", "at"};

void match_facts(const std::vector<Token>& s, std::vector<Claim>& out) {
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (!is_any(s, i, kHave) || !is_plain_number(s, i + 1)) continue;
    std::size_t noun = i + 2;
    std::string qualifier;
    if (is_word(s, noun, "training") || is_word(s, noun, "train")) {
      qualifier = "train_";
      ++noun;
    } else if (is_word(s, noun, "test") || is_word(s, noun, "held-out")) {
      qualifier = "test_";
      ++noun;
    }
    Claim c;
    c.kind = ClaimKind::fact;
    c.value = s[i + 1].value;
    c.decimals = s[i + 1].decimals;
    if (is_any(s, noun, kRowNouns)) {
      c.subject = qualifier + "rows";
    } else if (qualifier.empty() && is_any(s, noun, kColNouns)) {
      c.subject = "columns";
    } else {
      continue;
    }
    out.push_back(std::move(c));
  }
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i].kind != Tok::word || s[i].text.find('_') == std::string::npos) continue;
    std::size_t v = i + 1;
    if (s[v].kind == Tok::punct && s[v].text == "=") {
      ++v;
    } else if (is_any(s, v, kIs)) {
      ++v;
    } else {
      continue;
    }
    if (!is_plain_number(s, v)) continue;
    Claim c;
    c.kind = ClaimKind::fact;
    c.subject = s[i].text;
    c.value = s[v].value;
    c.decimals = s[v].decimals;
    out.push_back(std::move(c));
  }
}

struct Phrase {
  std::string_view predicate;
  bool polarity;
  std::string_view words;
};

// Longer phrases are tried first so "no missing values" wins over "missing values".
constexpr std::array<Phrase, 37> kPhrases{{
    {"missing_values", false, "there are no missing values"},
    {"missing_values", false, "has no missing values"},
    {"missing_values", false, "without missing values"},
    {"missing_values", false, "no missing values"},
    {"missing_values", false, "no missing data"},
    {"missing_values", true, "missing values were imputed"},
    {"missing_values", true, "imputed missing values"},
    {"missing_values", true, "imputed the missing values"},
    {"missing_values", true, "filled missing values"},
    {"missing_values", true, "contains missing values"},
    {"missing_values", true, "has missing values"},
    {"scaling", false, "left the features unscaled"},
    {"scaling", false, "did not scale"},
    {"scaling", false, "without scaling"},
    {"scaling", false, "no scaling"},
    {"scaling", true, "scaled the features"},
    {"scaling", true, "features were scaled"},
    {"scaling", true, "standardized the features"},
    {"scaling", true, "we scaled"},
    {"split", false, "trained on all rows"},
    {"split", false, "did not split"},
    {"split", false, "without a split"},
    {"split", false, "no test split"},
    {"split", true, "held out a test set"},
    {"split", true, "split the data"},
    {"split", true, "we split"},
    {"regularization", false, "turned regularization off"},
    {"regularization", false, "disabled regularization"},
    {"regularization", false, "without regularization"},
    {"regularization", false, "no regularization"},
    {"regularization", false, "removed the penalty"},
    {"regularization", true, "kept regularization on"},
    {"regularization", true, "kept regularization"},
    {"regularization", true, "with regularization"},
    {"regularization", true, "kept an l2 penalty"},
    {"regularization", true, "used an l2 penalty"},
    {"regularization", true, "regularized the model"},
}};

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = s.find(' ', i);
    if (j == std::string_view::npos) j = s.size();
    out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

struct SplitPhrase {
  const Phrase* phrase;
  std::vector<std::string_view> words;
};

const std::vector<SplitPhrase>& phrase_table() {
  static const std::vector<SplitPhrase> table = [] {
    std::vector<SplitPhrase> t;
    for (const auto& p : kPhrases) t.push_back({&p, split_words(p.words)});
    std::stable_sort(t.begin(), t.end(),
                     [](const SplitPhrase& a, const SplitPhrase& b) { return a.words.size() > b.words.size(); });
    return t;
  }();
  return table;
}

void match_predicates(const std::vector<Token>& s, std::vector<Claim>& out) {
  struct Hit {
    std::size_t start;
    std::size_t len;
    const Phrase* phrase;
  };
  std::vector<char> used(s.size(), 0);
  std::vector<Hit> hits;
  for (const auto& [p, words] : phrase_table()) {
    for (std::size_t i = 0; i + words.size() <= s.size(); ++i) {
      bool ok = true;
      for (std::size_t k = 0; k < words.size() && ok; ++k) ok = !used[i + k] && is_word(s, i + k, words[k]);
      if (!ok) continue;
      for (std::size_t k = 0; k < words.size(); ++k) used[i + k] = 1;
      hits.push_back({i, words.size(), p});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.start < b.start; });
  for (const auto& h : hits) {
    Claim c;
    c.kind = ClaimKind::predicate;
    c.subject = std::string(h.phrase->predicate);
    c.polarity = h.phrase->polarity;
    out.push_back(std::move(c));
  }
}

constexpr std::array<std::string_view, 10> kActVerbs{"applied", "used", "ran", "performed", "chose",
                                                     "selected", "fitted", "fit", "apply", "use"};
constexpr std::array<std::string_view, 3> kArticles{"a", "an", "the"};

void match_action_refs(const std::vector<Token>& s, std::vector<Claim>& out) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (!is_any(s, i, kActVerbs)) continue;
    std::size_t k = i + 1;
    if (is_any(s, k, kArticles)) ++k;
    if (k >= s.size() || s[k].kind != Tok::word) continue;
    const std::string& w = s[k].text;
    if (!is_known_action(w) && w.find('_') == std::string::npos) continue;
    Claim c;
    c.kind = ClaimKind::action_ref;
    c.subject = w;
    out.push_back(std::move(c));
  }
}

}  // namespace

std::vector<Claim> extract_claims(std::string_view text) {
  const auto tokens = tokenize(text);
  std::vector<Claim> out;
  std::vector<Token> sentence;
  auto flush = [&]() {
    if (sentence.empty()) return;
    std::vector<Claim> local;
    match_facts(sentence, local);
    match_derivations(sentence, local);
    match_predicates(sentence, local);
    match_action_refs(sentence, local);
    out.insert(out.end(), local.begin(), local.end());
    sentence.clear();
  };
  for (const auto& t : tokens) {
    if (sentence_break(t)) {
      flush();
    } else {
      sentence.push_back(t);
    }
  }
  flush();
  return out;
}

bool metric_word_lower_is_better(std::string_view m) {
  return m == "rmse" || m == "mae" || m == "mse" || m == "loss" || m == "error" || m == "logloss";
}

double relative_improvement_pct(std::string_view metric, double from, double to) {
  const double raw = (to - from) / std::fabs(from) * 100.0;
  return metric_word_lower_is_better(metric) ? -raw : raw;
}

}  // namespace ea
