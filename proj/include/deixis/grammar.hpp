#pragma once

#include "deixis/error.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace deixis {

enum class UnitKind { Degrees, SpeedLevel, Spatial };

std::string_view to_string(UnitKind kind);

/// A metric refinement. Degrees carry a number; speed levels and spatial
/// qualifiers carry their word, speed levels also their rank on the scale.
struct Metric {
    UnitKind unit = UnitKind::Degrees;
    double value = 0.0;
    std::string qualifier;

    bool operator==(const Metric&) const = default;
};

/// Keyword vocabulary. Loaded from config; the five word sets must be
/// pairwise disjoint.
struct Lexicon {
    std::map<std::string, std::string> action_words;  // word -> action name
    std::map<std::string, std::string> class_words;   // word -> class label
    std::set<std::string> pronoun_words;
    std::map<std::string, UnitKind> metric_units;     // unit or qualifier word -> kind
    std::set<std::string> finish_words;
    std::vector<std::string> speed_scale;             // ordered speed words, rank = index + 1
    std::map<std::string, double> number_words;       // "ninety" -> 90

    /// Throws InvalidLexicon when any word appears in two sets, a speed word
    /// is not a SpeedLevel unit, or a set contains an empty word.
    void validate() const;

    /// Action names the vocabulary can produce.
    std::set<std::string> action_names() const;

    static Lexicon from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct WordToken {
    std::string text;
    double t_start = 0.0;
    double t_end = 0.0;
    double confidence = 1.0;
};

enum class TokenKind { Action, Class, Pronoun, Metric, MetricUnit, Finish, Unknown };

std::string_view to_string(TokenKind kind);

/// `MetricUnit` is a unit word ("degrees") still waiting for its number; the
/// command stream folds it with the preceding number into a `Metric`.
struct CommandToken {
    TokenKind kind = TokenKind::Unknown;
    std::string name;       // action name or class label
    Metric metric;          // valid for Metric / MetricUnit
    std::vector<WordToken> source;

    double t_start() const { return source.empty() ? 0.0 : source.front().t_start; }
    double t_end() const { return source.empty() ? 0.0 : source.back().t_end; }
};

/// Lexical classification of one word; case-insensitive.
CommandToken classify(const WordToken& token, const Lexicon& lex);

/// Parses "<number> <unit>" or a standalone qualifier into a Metric token.
/// Throws MalformedMetric on anything else.
CommandToken parse_metric(std::span<const WordToken> tokens, const Lexicon& lex);

/// Numeric value of a word: digits ("90", "12.5") or a number_words entry.
std::optional<double> number_value(const std::string& word, const Lexicon& lex);

std::string lowercase(std::string s);

/// Streaming front end: turns recognised words into command tokens, pairing
/// numbers with the unit word that follows. Malformed metric phrases are
/// reported as diagnostics and dropped; they never stop the stream.
class CommandStream {
public:
    explicit CommandStream(const Lexicon& lex) : lex_(&lex) {}

    struct Output {
        std::vector<CommandToken> tokens;
        std::vector<Error> diagnostics;
    };

    Output push(const WordToken& word);

    /// Flushes a dangling number (reported as MalformedMetric).
    Output flush();

    void reset() { pending_number_.reset(); }

private:
    const Lexicon* lex_;
    std::optional<WordToken> pending_number_;
};

}  // namespace deixis
