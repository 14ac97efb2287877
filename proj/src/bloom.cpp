#include "exr/bloom.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace exr::bloom {

namespace {

constexpr std::string_view kProcessNames[] = {"Remember", "Understand", "Apply",
                                              "Analyze",  "Evaluate",   "Create"};
constexpr std::string_view kKnowledgeNames[] = {"Factual", "Conceptual", "Procedural",
                                                "Metacognitive"};

}  // namespace

std::string_view to_string(Process p) { return kProcessNames[rank(p)]; }
std::string_view to_string(Knowledge k) { return kKnowledgeNames[rank(k)]; }

std::optional<Process> parse_process(std::string_view s) {
  for (auto p : kProcesses)
    if (iequals(s, to_string(p))) return p;
  return std::nullopt;
}

std::optional<Knowledge> parse_knowledge(std::string_view s) {
  for (auto k : kKnowledge)
    if (iequals(s, to_string(k))) return k;
  return std::nullopt;
}

std::string to_string(const Cell& c) {
  return "(" + std::string(to_string(c.process)) + ", " + std::string(to_string(c.knowledge)) +
         ")";
}

bool leq(const Cell& a, const Cell& b) {
  return a.process <= b.process && a.knowledge <= b.knowledge;
}

Cell join(const Cell& a, const Cell& b) {
  return {std::max(a.process, b.process), std::max(a.knowledge, b.knowledge)};
}

// ---------------------------------------------------------------------------

ClueTable ClueTable::parse(std::string_view text) {
  ClueTable table;
  std::size_t offset = 0;
  for (auto raw : split(text, '\n')) {
    const std::size_t line_offset = offset;
    offset += raw.size() + 1;
    auto line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    const SourcePos pos = position_at(text, line_offset);
    if (arrow == std::string_view::npos) throw ParseError("expected '->' in clue line", pos);
    auto lhs = trim(line.substr(0, arrow));
    auto rhs = trim(line.substr(arrow + 2));
    const auto space = lhs.find(' ');
    if (space == std::string_view::npos) throw ParseError("expected 'verb' or 'noun'", pos);
    const auto kind = lhs.substr(0, space);
    const auto key = to_lower(trim(lhs.substr(space + 1)));
    if (kind == "verb") {
      auto p = parse_process(rhs);
      if (!p) throw ParseError("unknown process category '" + std::string(rhs) + "'", pos);
      table.add_verb(key, *p);
    } else if (kind == "noun") {
      auto k = parse_knowledge(rhs);
      if (!k) throw ParseError("unknown knowledge category '" + std::string(rhs) + "'", pos);
      table.add_noun(key, *k);
    } else {
      throw ParseError("expected 'verb' or 'noun'", pos);
    }
  }
  return table;
}

void ClueTable::add_verb(std::string lemma, Process p) { verbs_[to_lower(lemma)] = p; }
void ClueTable::add_noun(std::string id, Knowledge k) { nouns_[to_lower(id)] = k; }

std::optional<Process> ClueTable::verb(std::string_view lemma) const {
  auto it = verbs_.find(to_lower(lemma));
  if (it == verbs_.end()) return std::nullopt;
  return it->second;
}

std::optional<Knowledge> ClueTable::noun(std::string_view id) const {
  auto it = nouns_.find(to_lower(id));
  if (it == nouns_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::string>> ClueTable::verb_phrases() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& [lemma, p] : verbs_) {
    std::vector<std::string> words;
    for (auto w : split(lemma, '-')) words.emplace_back(w);
    out.push_back(std::move(words));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_stopword(const std::string& w) {
  static const std::set<std::string> words = {
      "to",   "be",   "able", "between", "an",  "a",    "the",  "and",  "or",   "in",
      "of",   "its",  "how",  "into",    "for", "with", "on",   "from", "by",   "their",
      "his",  "her",  "your", "what",    "that", "this", "these", "those", "is", "are",
      "some", "each", "any",  "all",     "as",  "at",   "it"};
  return words.count(w) > 0;
}

std::string singular(std::string w) {
  auto ends = [&](std::string_view s) {
    return w.size() > s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
  };
  if (ends("ss") || ends("is") || ends("us")) return w;
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("s")) return w.substr(0, w.size() - 1);
  return w;
}

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// Length of the longest lexicon verb starting at words[i], or 0.
std::size_t verb_at(const std::vector<std::string>& words, std::size_t i,
                    const std::vector<std::vector<std::string>>& phrases) {
  for (const auto& ph : phrases) {
    if (i + ph.size() > words.size()) continue;
    if (std::equal(ph.begin(), ph.end(), words.begin() + static_cast<std::ptrdiff_t>(i)))
      return ph.size();
  }
  return 0;
}

std::string join_words(const std::vector<std::string>& w, std::size_t from, std::size_t n) {
  std::string s;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) s += '-';
    s += w[from + k];
  }
  return s;
}

}  // namespace

Statement normalize_statement(std::string_view text, const ClueTable& clues) {
  const auto words = words_of(text);
  const auto phrases = clues.verb_phrases();
  std::size_t i = 0;
  std::size_t len = 0;
  for (; i < words.size(); ++i)
    if ((len = verb_at(words, i, phrases)) > 0) break;
  if (len == 0) throw Error("CannotNormalize", "no known verb in statement '" + std::string(text) + "'");

  Statement st;
  st.verb = join_words(words, i, len);
  i += len;
  if (st.verb == "how-to") {
    // "how to implement X": the governed verb is part of the clue.
    for (std::size_t j = i; j < words.size(); ++j)
      if (std::size_t l = verb_at(words, j, phrases); l > 0) {
        i = j + l;
        break;
      }
  }

  std::vector<std::string> run;
  auto flush = [&] {
    if (run.empty()) return;
    run.back() = singular(run.back());
    st.np.push_back(join_words(run, 0, run.size()));
    run.clear();
  };
  for (; i < words.size(); ++i) {
    if (is_stopword(words[i])) {
      flush();
    } else {
      run.push_back(words[i]);
    }
  }
  flush();
  return st;
}

std::string Classification::missing_side() const {
  if (verb_missing && noun_missing) return "both";
  if (verb_missing) return "verb";
  if (noun_missing) return "noun";
  return "";
}

Classification classify(const Statement& s, const ClueTable& clues) {
  Classification c;
  auto p = clues.verb(s.verb);
  std::optional<Knowledge> k;
  for (const auto& n : s.np) {
    auto kn = clues.noun(n);
    if (!kn) {
      k.reset();
      c.noun_missing = true;
      break;
    }
    k = k ? std::max(*k, *kn) : *kn;
  }
  if (s.np.empty()) c.noun_missing = true;
  c.verb_missing = !p;
  if (p && k && !c.noun_missing) c.cell = Cell{*p, *k};
  return c;
}

Cell dynamic_cell(const Cell& static_cell, Knowledge student) {
  if (student < static_cell.knowledge) return {Process::Create, static_cell.knowledge};
  return static_cell;
}

std::string_view to_string(CourseLevel l) {
  switch (l) {
    case CourseLevel::ReadingUnderstanding: return "ReadingUnderstanding";
    case CourseLevel::WritingSmallFragments: return "WritingSmallFragments";
    case CourseLevel::WritingNontrivial: return "WritingNontrivial";
  }
  return "?";
}

CourseLevel course_level(const Cell& c) {
  switch (c.process) {
    case Process::Remember:
    case Process::Understand: return CourseLevel::ReadingUnderstanding;
    case Process::Apply:
    case Process::Analyze: return CourseLevel::WritingSmallFragments;
    default: return CourseLevel::WritingNontrivial;
  }
}

Grouping Grouping::parse(std::string_view text) {
  Grouping g;
  std::size_t offset = 0;
  for (auto raw : split(text, '\n')) {
    const SourcePos pos = position_at(text, offset);
    offset += raw.size() + 1;
    auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    const auto space = line.find(' ');
    if (arrow == std::string_view::npos || space == std::string_view::npos || space > arrow)
      throw ParseError("expected '<process|knowledge> <Category> -> <Group>'", pos);
    const auto kind = line.substr(0, space);
    const auto cat = trim(line.substr(space + 1, arrow - space - 1));
    const std::string group(trim(line.substr(arrow + 2)));
    if (kind == "process") {
      auto p = parse_process(cat);
      if (!p) throw ParseError("unknown process category '" + std::string(cat) + "'", pos);
      g.process_[*p] = group;
    } else if (kind == "knowledge") {
      auto k = parse_knowledge(cat);
      if (!k) throw ParseError("unknown knowledge category '" + std::string(cat) + "'", pos);
      g.knowledge_[*k] = group;
    } else {
      throw ParseError("expected 'process' or 'knowledge'", pos);
    }
  }
  return g;
}

std::optional<std::string> Grouping::group(Process p) const {
  auto it = process_.find(p);
  if (it == process_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Grouping::group(Knowledge k) const {
  auto it = knowledge_.find(k);
  if (it == knowledge_.end()) return std::nullopt;
  return it->second;
}

}  // namespace exr::bloom
