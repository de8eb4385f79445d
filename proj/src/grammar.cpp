#include "deixis/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace deixis {

std::string_view to_string(UnitKind kind) {
    switch (kind) {
        case UnitKind::Degrees: return "degrees";
        case UnitKind::SpeedLevel: return "speed";
        case UnitKind::Spatial: return "spatial";
    }
    return "?";
}

std::string_view to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::Action: return "action";
        case TokenKind::Class: return "class";
        case TokenKind::Pronoun: return "pronoun";
        case TokenKind::Metric: return "metric";
        case TokenKind::MetricUnit: return "metric_unit";
        case TokenKind::Finish: return "finish";
        case TokenKind::Unknown: return "unknown";
    }
    return "?";
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

namespace {

UnitKind unit_kind_from_string(const std::string& s) {
    if (s == "degrees") return UnitKind::Degrees;
    if (s == "speed") return UnitKind::SpeedLevel;
    if (s == "spatial") return UnitKind::Spatial;
    throw Error(ErrorCode::InvalidLexicon, "unknown metric unit kind '" + s + "'");
}

std::optional<double> parse_decimal(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::fixed);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool is_standalone(UnitKind k) { return k == UnitKind::Spatial || k == UnitKind::SpeedLevel; }

Metric qualifier_metric(const std::string& word, UnitKind kind, const Lexicon& lex) {
    Metric m;
    m.unit = kind;
    m.qualifier = word;
    if (kind == UnitKind::SpeedLevel) {
        auto it = std::find(lex.speed_scale.begin(), lex.speed_scale.end(), word);
        m.value = it == lex.speed_scale.end() ? 0.0 : static_cast<double>(it - lex.speed_scale.begin() + 1);
    }
    return m;
}

}  // namespace

void Lexicon::validate() const {
    std::map<std::string, std::string> owner;
    auto claim = [&owner](const std::string& word, const char* set) {
        if (word.empty()) throw Error(ErrorCode::InvalidLexicon, std::string("empty word in ") + set);
        if (word != lowercase(word)) {
            throw Error(ErrorCode::InvalidLexicon, "lexicon word '" + word + "' must be lowercase");
        }
        auto [it, inserted] = owner.emplace(word, set);
        if (!inserted) {
            throw Error(ErrorCode::InvalidLexicon,
                        "word '" + word + "' appears in both " + it->second + " and " + set);
        }
    };
    for (const auto& [w, _] : action_words) claim(w, "action_words");
    for (const auto& [w, _] : class_words) claim(w, "class_words");
    for (const auto& w : pronoun_words) claim(w, "pronoun_words");
    for (const auto& [w, _] : metric_units) claim(w, "metric_units");
    for (const auto& w : finish_words) claim(w, "finish_words");
    for (const auto& [w, _] : number_words) claim(w, "number_words");
    for (const auto& w : speed_scale) {
        auto it = metric_units.find(w);
        if (it == metric_units.end() || it->second != UnitKind::SpeedLevel) {
            throw Error(ErrorCode::InvalidLexicon, "speed word '" + w + "' must be a speed metric unit");
        }
    }
    for (const auto& [w, v] : number_words) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidLexicon, "number word '" + w + "' is not finite");
    }
}

std::set<std::string> Lexicon::action_names() const {
    std::set<std::string> names;
    for (const auto& [_, a] : action_words) names.insert(a);
    return names;
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
    Lexicon lex;
    try {
        lex.action_words = j.at("action_words").get<std::map<std::string, std::string>>();
        lex.class_words = j.at("class_words").get<std::map<std::string, std::string>>();
        lex.pronoun_words = j.at("pronoun_words").get<std::set<std::string>>();
        for (const auto& [w, kind] : j.at("metric_units").items()) {
            lex.metric_units.emplace(w, unit_kind_from_string(kind.get<std::string>()));
        }
        lex.finish_words = j.at("finish_words").get<std::set<std::string>>();
        lex.speed_scale = j.value("speed_scale", std::vector<std::string>{});
        lex.number_words = j.value("number_words", std::map<std::string, double>{});
        // Duplicates inside one JSON array would otherwise collapse silently.
        for (const char* key : {"pronoun_words", "finish_words"}) {
            const auto& arr = j.at(key);
            if (arr.size() != std::set<std::string>(arr.begin(), arr.end()).size()) {
                throw Error(ErrorCode::InvalidLexicon, std::string("duplicate word in ") + key);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidLexicon, e.what());
    }
    lex.validate();
    return lex;
}

nlohmann::json Lexicon::to_json() const {
    nlohmann::json units = nlohmann::json::object();
    for (const auto& [w, k] : metric_units) units[w] = std::string(to_string(k));
    return {{"action_words", action_words}, {"class_words", class_words},
            {"pronoun_words", pronoun_words}, {"metric_units", units},
            {"finish_words", finish_words}, {"speed_scale", speed_scale},
            {"number_words", number_words}};
}

std::optional<double> number_value(const std::string& word, const Lexicon& lex) {
    const std::string w = lowercase(word);
    if (auto it = lex.number_words.find(w); it != lex.number_words.end()) return it->second;
    return parse_decimal(w);
}

CommandToken classify(const WordToken& token, const Lexicon& lex) {
    CommandToken out;
    out.source.push_back(token);
    const std::string w = lowercase(token.text);
    if (auto it = lex.action_words.find(w); it != lex.action_words.end()) {
        out.kind = TokenKind::Action;
        out.name = it->second;
    } else if (auto c = lex.class_words.find(w); c != lex.class_words.end()) {
        out.kind = TokenKind::Class;
        out.name = c->second;
    } else if (lex.pronoun_words.count(w) != 0) {
        out.kind = TokenKind::Pronoun;
    } else if (auto m = lex.metric_units.find(w); m != lex.metric_units.end()) {
        if (is_standalone(m->second)) {
            out.kind = TokenKind::Metric;
            out.metric = qualifier_metric(w, m->second, lex);
        } else {
            out.kind = TokenKind::MetricUnit;
            out.metric.unit = m->second;
        }
    } else if (lex.finish_words.count(w) != 0) {
        out.kind = TokenKind::Finish;
    }
    return out;
}

CommandToken parse_metric(std::span<const WordToken> tokens, const Lexicon& lex) {
    CommandToken out;
    out.kind = TokenKind::Metric;
    out.source.assign(tokens.begin(), tokens.end());
    if (tokens.size() == 1) {
        const std::string w = lowercase(tokens[0].text);
        if (auto m = lex.metric_units.find(w); m != lex.metric_units.end()) {
            if (is_standalone(m->second)) {
                out.metric = qualifier_metric(w, m->second, lex);
                return out;
            }
            throw Error(ErrorCode::MalformedMetric, "unit '" + w + "' without a number");
        }
        if (number_value(w, lex)) throw Error(ErrorCode::MalformedMetric, "number '" + w + "' without a unit");
        throw Error(ErrorCode::MalformedMetric, "'" + w + "' is not a metric phrase");
    }
    if (tokens.size() == 2) {
        const auto value = number_value(tokens[0].text, lex);
        const std::string unit = lowercase(tokens[1].text);
        auto m = lex.metric_units.find(unit);
        if (!value) throw Error(ErrorCode::MalformedMetric, "'" + tokens[0].text + "' is not a number");
        if (m == lex.metric_units.end() || is_standalone(m->second)) {
            throw Error(ErrorCode::MalformedMetric, "number followed by '" + unit + "', not a unit");
        }
        out.metric.unit = m->second;
        out.metric.value = *value;
        return out;
    }
    throw Error(ErrorCode::MalformedMetric, "metric phrase must be one or two words");
}

CommandStream::Output CommandStream::push(const WordToken& word) {
    Output out;
    const std::string w = lowercase(word.text);
    CommandToken tok = classify(word, *lex_);
    const bool numeric = tok.kind == TokenKind::Unknown && number_value(w, *lex_).has_value();
    const bool number_word = lex_->number_words.count(w) != 0;

    if (numeric || number_word) {
        if (pending_number_) {
            out.diagnostics.emplace_back(ErrorCode::MalformedMetric,
                                         "number '" + pending_number_->text + "' without a unit");
        }
        pending_number_ = word;
        return out;
    }
    if (tok.kind == TokenKind::MetricUnit) {
        if (pending_number_) {
            const WordToken pair[2] = {*pending_number_, word};
            pending_number_.reset();
            try {
                out.tokens.push_back(parse_metric(pair, *lex_));
            } catch (const Error& e) {
                out.diagnostics.push_back(e);
            }
        } else {
            out.diagnostics.emplace_back(ErrorCode::MalformedMetric, "unit '" + w + "' without a number");
        }
        return out;
    }
    if (pending_number_) {
        out.diagnostics.emplace_back(ErrorCode::MalformedMetric,
                                     "number '" + pending_number_->text + "' without a unit");
        pending_number_.reset();
    }
    out.tokens.push_back(std::move(tok));
    return out;
}

CommandStream::Output CommandStream::flush() {
    Output out;
    if (pending_number_) {
        out.diagnostics.emplace_back(ErrorCode::MalformedMetric,
                                     "number '" + pending_number_->text + "' without a unit");
        pending_number_.reset();
    }
    return out;
}

}  // namespace deixis
