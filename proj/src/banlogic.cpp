/*
 *   Copyright (c) 2026 The Varikey Authors.
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */
#include "varikey/banlogic.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace varikey::banlogic {

using Kind = Statement::Kind;

Statement atom(std::string name) {
    Statement s;
    s.kind = Kind::atom;
    s.name = std::move(name);
    return s;
}

Statement conj(Statement a, Statement b) {
    Statement s;
    s.kind = Kind::conj;
    s.args = {std::move(a), std::move(b)};
    return s;
}

namespace {

Statement modal(Kind kind, std::string principal, Statement x) {
    Statement s;
    s.kind = kind;
    s.name = std::move(principal);
    s.args = {std::move(x)};
    return s;
}

}  // namespace

Statement believes(std::string p, Statement x) {
    return modal(Kind::believes, std::move(p), std::move(x));
}
Statement sees(std::string p, Statement x) {
    return modal(Kind::sees, std::move(p), std::move(x));
}
Statement said(std::string p, Statement x) {
    return modal(Kind::said, std::move(p), std::move(x));
}
Statement controls(std::string p, Statement x) {
    return modal(Kind::controls, std::move(p), std::move(x));
}

Statement fresh(Statement x) {
    Statement s;
    s.kind = Kind::fresh;
    s.args = {std::move(x)};
    return s;
}

Statement shared_key(std::string p, std::string q, std::string k) {
    Statement s;
    s.kind = Kind::shared_key;
    s.args = {atom(std::move(p)), atom(std::move(q)), atom(std::move(k))};
    return s;
}

Statement encrypted(Statement x, std::string k) {
    Statement s;
    s.kind = Kind::encrypted;
    s.args = {std::move(x), atom(std::move(k))};
    return s;
}

std::string to_string(const Statement& s) {
    switch (s.kind) {
        case Kind::atom:
            return s.name;
        case Kind::conj: {
            // flatten the right spine so (a,(b,c)) prints as (a,b,c)
            std::string out = "(" + to_string(s.args[0]);
            const Statement* rest = &s.args[1];
            while (rest->kind == Kind::conj) {
                out += "," + to_string(rest->args[0]);
                rest = &rest->args[1];
            }
            out += "," + to_string(*rest) + ")";
            return out;
        }
        case Kind::believes:
            return s.name + " |= " + to_string(s.args[0]);
        case Kind::sees:
            return s.name + " <- " + to_string(s.args[0]);
        case Kind::said:
            return s.name + " |~ " + to_string(s.args[0]);
        case Kind::controls:
            return s.name + " => " + to_string(s.args[0]);
        case Kind::fresh:
            return "#(" + to_string(s.args[0]) + ")";
        case Kind::shared_key:
            return "key(" + s.args[0].name + "," + s.args[1].name + "," +
                   s.args[2].name + ")";
        case Kind::encrypted:
            return "enc(" + to_string(s.args[0]) + "," + s.args[1].name + ")";
    }
    return "?";
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Statement parse() {
        Statement s = parse_statement();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return s;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw BanParseError(what, pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
            ++pos_;
        }
    }

    bool ident_char(char c) const {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
               (c >= '0' && c <= '9') || c == '_' || c == '+';
    }

    bool consume(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        if (pos_ == start) fail("expected identifier");
        return std::string(text_.substr(start, pos_ - start));
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    // statement := term (('|=' | '<-' | '|~' | '=>') statement)?
    // The left side of a modal operator must be a bare principal name.
    Statement parse_statement() {
        Statement left = parse_term();
        skip_ws();
        Kind op;
        if (consume("|=")) {
            op = Kind::believes;
        } else if (consume("|~")) {
            op = Kind::said;
        } else if (consume("<-")) {
            op = Kind::sees;
        } else if (consume("=>")) {
            op = Kind::controls;
        } else {
            return left;
        }
        if (left.kind != Kind::atom) fail("principal must be a plain name");
        return modal(op, left.name, parse_statement());
    }

    Statement parse_term() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '#') {
            ++pos_;
            expect('(');
            Statement x = parse_statement();
            expect(')');
            return fresh(std::move(x));
        }
        if (c == '(') {
            ++pos_;
            std::vector<Statement> items;
            items.push_back(parse_statement());
            skip_ws();
            while (consume(",")) items.push_back(parse_statement());
            expect(')');
            if (items.size() == 1) return items[0];  // plain grouping
            Statement out = items.back();
            for (std::size_t i = items.size() - 1; i-- > 0;) {
                out = conj(items[i], std::move(out));
            }
            return out;
        }
        std::string name = parse_ident();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(' && name == "key") {
            ++pos_;
            std::string p = parse_ident();
            expect(',');
            std::string q = parse_ident();
            expect(',');
            std::string k = parse_ident();
            expect(')');
            return shared_key(p, q, k);
        }
        if (pos_ < text_.size() && text_[pos_] == '(' && name == "enc") {
            ++pos_;
            Statement x = parse_statement();
            expect(',');
            std::string k = parse_ident();
            expect(')');
            return encrypted(std::move(x), k);
        }
        return atom(std::move(name));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Statement parse_statement(std::string_view text) { return Parser(text).parse(); }

std::string_view rule_name(Rule r) {
    switch (r) {
        case Rule::R1: return "R1";
        case Rule::R2: return "R2";
        case Rule::R3: return "R3";
        case Rule::R4: return "R4";
    }
    return "?";
}

std::optional<Statement> apply_rule(Rule rule,
                                    std::span<const Statement> premises,
                                    const Statement* freshness_target) {
    switch (rule) {
        case Rule::R1: {
            if (premises.size() != 2) return std::nullopt;
            const Statement& belief = premises[0];
            const Statement& seen = premises[1];
            if (belief.kind != Kind::believes || seen.kind != Kind::sees) {
                return std::nullopt;
            }
            if (belief.name != seen.name) return std::nullopt;
            const Statement& key = belief.args[0];
            const Statement& enc = seen.args[0];
            if (key.kind != Kind::shared_key || enc.kind != Kind::encrypted) {
                return std::nullopt;
            }
            // key(Q, P, k) seen by P under the same k
            if (key.args[1].name != belief.name) return std::nullopt;
            if (key.args[2] != enc.args[1]) return std::nullopt;
            return believes(belief.name, said(key.args[0].name, enc.args[0]));
        }
        case Rule::R2: {
            if (premises.size() != 2) return std::nullopt;
            const Statement& fr = premises[0];
            const Statement& sd = premises[1];
            if (fr.kind != Kind::believes || sd.kind != Kind::believes) {
                return std::nullopt;
            }
            if (fr.name != sd.name) return std::nullopt;
            if (fr.args[0].kind != Kind::fresh || sd.args[0].kind != Kind::said) {
                return std::nullopt;
            }
            if (fr.args[0].args[0] != sd.args[0].args[0]) return std::nullopt;
            return believes(fr.name,
                            believes(sd.args[0].name, sd.args[0].args[0]));
        }
        case Rule::R3: {
            if (premises.size() != 2) return std::nullopt;
            const Statement& ctrl = premises[0];
            const Statement& bel = premises[1];
            if (ctrl.kind != Kind::believes || bel.kind != Kind::believes) {
                return std::nullopt;
            }
            if (ctrl.name != bel.name) return std::nullopt;
            if (ctrl.args[0].kind != Kind::controls ||
                bel.args[0].kind != Kind::believes) {
                return std::nullopt;
            }
            if (ctrl.args[0].name != bel.args[0].name) return std::nullopt;
            if (ctrl.args[0].args[0] != bel.args[0].args[0]) return std::nullopt;
            return believes(ctrl.name, ctrl.args[0].args[0]);
        }
        case Rule::R4: {
            if (premises.size() != 1 || freshness_target == nullptr) {
                return std::nullopt;
            }
            const Statement& fr = premises[0];
            if (fr.kind != Kind::believes || fr.args[0].kind != Kind::fresh) {
                return std::nullopt;
            }
            const Statement& x = fr.args[0].args[0];
            if (freshness_target->kind != Kind::conj) return std::nullopt;
            if (freshness_target->args[0] != x && freshness_target->args[1] != x) {
                return std::nullopt;
            }
            return believes(fr.name, fresh(*freshness_target));
        }
    }
    return std::nullopt;
}

bool validate_step(const ProofStep& step) {
    const Statement* target = nullptr;
    if (step.rule == Rule::R4 && step.conclusion.kind == Kind::believes &&
        step.conclusion.args[0].kind == Kind::fresh) {
        target = &step.conclusion.args[0].args[0];
    }
    auto got = apply_rule(step.rule, step.premises, target);
    return got && *got == step.conclusion;
}

namespace {

void collect_conj_terms(const Statement& s, std::vector<Statement>& out,
                        std::unordered_set<std::string>& seen) {
    if (s.kind == Kind::conj && seen.insert(to_string(s)).second) {
        out.push_back(s);
    }
    for (const Statement& a : s.args) collect_conj_terms(a, out, seen);
}

}  // namespace

Derivation derive(std::span<const Statement> assumptions,
                  std::span<const Statement> messages,
                  std::span<const Statement> goals, unsigned max_depth) {
    if (max_depth < 1) throw DomainError("derivation depth must be >= 1");

    std::vector<Statement> kb;
    std::unordered_set<std::string> known;
    auto add_base = [&](const Statement& s) {
        if (known.insert(to_string(s)).second) kb.push_back(s);
    };
    for (const Statement& s : assumptions) add_base(s);
    for (const Statement& s : messages) add_base(s);

    std::vector<Statement> conj_terms;
    std::unordered_set<std::string> conj_seen;
    for (const Statement& s : kb) collect_conj_terms(s, conj_terms, conj_seen);

    std::vector<ProofStep> all_steps;
    std::unordered_map<std::string, std::size_t> producer;  // conclusion -> step

    auto emit = [&](Rule rule, std::vector<Statement> premises,
                    Statement conclusion) -> bool {
        std::string key = to_string(conclusion);
        if (!known.insert(key).second) return false;
        producer.emplace(key, all_steps.size());
        all_steps.push_back({rule, std::move(premises), conclusion});
        kb.push_back(std::move(conclusion));
        collect_conj_terms(kb.back(), conj_terms, conj_seen);
        return true;
    };

    for (unsigned round = 0; round < max_depth; ++round) {
        bool changed = false;
        std::size_t kb_size = kb.size();  // statements added mid-round join next round
        for (std::size_t i = 0; i < kb_size; ++i) {
            const Statement a = kb[i];
            if (a.kind != Kind::believes && a.kind != Kind::sees) continue;
            // unary freshness promotion over the known conjunction terms
            for (const Statement& t : std::vector<Statement>(conj_terms)) {
                auto c = apply_rule(Rule::R4, std::span(&a, 1), &t);
                if (c) changed |= emit(Rule::R4, {a}, *c);
            }
            for (std::size_t j = 0; j < kb_size; ++j) {
                if (i == j) continue;
                const Statement& b = kb[j];
                std::vector<Statement> prem{a, b};
                for (Rule r : {Rule::R1, Rule::R2, Rule::R3}) {
                    auto c = apply_rule(r, prem);
                    if (c) changed |= emit(r, prem, *c);
                }
            }
        }
        if (!changed) break;
    }

    Derivation result;
    for (const Statement& g : goals) {
        if (!known.contains(to_string(g))) result.underivable.push_back(g);
    }
    result.success = result.underivable.empty();

    // minimal witnessing subset: steps the goals depend on, in emission order
    std::vector<bool> needed(all_steps.size(), false);
    std::vector<std::size_t> stack;
    for (const Statement& g : goals) {
        auto it = producer.find(to_string(g));
        if (it != producer.end()) stack.push_back(it->second);
    }
    while (!stack.empty()) {
        std::size_t idx = stack.back();
        stack.pop_back();
        if (needed[idx]) continue;
        needed[idx] = true;
        for (const Statement& p : all_steps[idx].premises) {
            auto it = producer.find(to_string(p));
            if (it != producer.end()) stack.push_back(it->second);
        }
    }
    for (std::size_t i = 0; i < all_steps.size(); ++i) {
        if (needed[i]) result.steps.push_back(all_steps[i]);
    }
    return result;
}

std::vector<Statement> Fixture::assumption_statements() const {
    std::vector<Statement> out;
    for (const auto& [label, s] : assumptions) out.push_back(s);
    return out;
}

std::vector<Statement> Fixture::message_statements() const {
    std::vector<Statement> out;
    for (const auto& [label, s] : messages) out.push_back(s);
    return out;
}

std::vector<Statement> Fixture::goal_statements() const {
    std::vector<Statement> out;
    for (const auto& [label, s] : goals) out.push_back(s);
    return out;
}

std::vector<Statement> Fixture::assumptions_without(std::string_view label) const {
    std::vector<Statement> out;
    for (const auto& [l, s] : assumptions) {
        if (l != label) out.push_back(s);
    }
    return out;
}

Fixture load_fixture(std::string_view text) {
    Fixture f;
    std::vector<std::pair<std::string, Statement>>* section = nullptr;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        // '#(' introduces a freshness term, not a comment
        while (hash != std::string::npos && hash + 1 < line.size() &&
               line[hash + 1] == '(') {
            hash = line.find('#', hash + 1);
        }
        if (hash != std::string::npos) line.resize(hash);
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        std::size_t end = line.find_last_not_of(" \t\r");
        std::string body = line.substr(begin, end - begin + 1);
        if (body == "[assumptions]") {
            section = &f.assumptions;
            continue;
        }
        if (body == "[messages]") {
            section = &f.messages;
            continue;
        }
        if (body == "[goals]") {
            section = &f.goals;
            continue;
        }
        if (!section) {
            throw DecodeError("fixture line " + std::to_string(lineno) +
                              " appears before any section header");
        }
        std::size_t colon = body.find(':');
        if (colon == std::string::npos) {
            throw DecodeError("fixture line " + std::to_string(lineno) +
                              " is missing its 'Label:' prefix");
        }
        std::string label = body.substr(0, colon);
        section->emplace_back(label, parse_statement(body.substr(colon + 1)));
    }
    return f;
}

std::string format_proof(const Derivation& d, const Fixture& f) {
    auto label_of = [&](const Statement& s) -> std::optional<std::string> {
        for (const auto& [l, st] : f.assumptions) {
            if (st == s) return l;
        }
        for (const auto& [l, st] : f.messages) {
            if (st == s) return l;
        }
        return std::nullopt;
    };
    std::unordered_map<std::string, std::size_t> step_no;
    std::ostringstream out;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const ProofStep& st = d.steps[i];
        out << (i + 1) << ": " << rule_name(st.rule) << "(";
        for (std::size_t p = 0; p < st.premises.size(); ++p) {
            if (p) out << ", ";
            if (auto l = label_of(st.premises[p])) {
                out << *l;
            } else if (auto it = step_no.find(to_string(st.premises[p]));
                       it != step_no.end()) {
                out << it->second;
            } else {
                out << "?";
            }
        }
        out << ") => " << to_string(st.conclusion) << "\n";
        step_no[to_string(st.conclusion)] = i + 1;
    }
    return out.str();
}

}  // namespace varikey::banlogic
