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
#ifndef VARIKEY_BANLOGIC_HPP
#define VARIKEY_BANLOGIC_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varikey/errors.hpp"

namespace varikey::banlogic {

/// Node of the belief-logic statement language. Conjunction is an ordered
/// pair; lists written (a,b,c) nest to the right. Equality is syntactic.
struct Statement {
    enum class Kind : std::uint8_t {
        atom,        // name
        conj,        // args[0], args[1]
        believes,    // name |= args[0]
        sees,        // name <- args[0]
        said,        // name |~ args[0]
        controls,    // name => args[0]
        fresh,       // #(args[0])
        shared_key,  // key(args[0], args[1], args[2]), all atoms
        encrypted,   // enc(args[0], args[1]), args[1] an atom
    };

    Kind kind = Kind::atom;
    std::string name;  // atom name, or the principal of a modal statement
    std::vector<Statement> args;

    bool operator==(const Statement&) const = default;
};

Statement atom(std::string name);
Statement conj(Statement a, Statement b);
Statement believes(std::string principal, Statement x);
Statement sees(std::string principal, Statement x);
Statement said(std::string principal, Statement x);
Statement controls(std::string principal, Statement x);
Statement fresh(Statement x);
Statement shared_key(std::string p, std::string q, std::string k);
Statement encrypted(Statement x, std::string k);

/// Canonical text form; parse_statement(to_string(s)) == s.
std::string to_string(const Statement& s);

/// Grammar: `P |= X` believes, `P <- X` sees, `P |~ X` said, `P => X`
/// controls, `#(X)` fresh, `key(P,Q,k)` shared key, `enc(X,k)` encryption,
/// `(X,Y,...)` right-nested conjunction, bare identifiers as atoms
/// (identifier characters: letters, digits, `_`, `+`).
/// Throws BanParseError with the offending position.
Statement parse_statement(std::string_view text);

enum class Rule { R1, R2, R3, R4 };

std::string_view rule_name(Rule r);

/// One checked inference.
struct ProofStep {
    Rule rule = Rule::R1;
    std::vector<Statement> premises;
    Statement conclusion;
};

/// Applies one rule schema to ordered premises.
///   R1 (message meaning): P |= key(Q,P,k), P <- enc(X,k)    gives P |= Q |~ X
///   R2 (nonce verification): P |= #(X), P |= Q |~ X         gives P |= Q |= X
///   R3 (jurisdiction): P |= Q => X, P |= Q |= X             gives P |= X
///   R4 (freshness): P |= #(X)                               gives P |= #(C)
/// where C (passed as target) is a conjunction with X as an immediate
/// component. Returns nullopt when the schema does not match; that is not an
/// error.
std::optional<Statement> apply_rule(Rule rule,
                                    std::span<const Statement> premises,
                                    const Statement* freshness_target = nullptr);

/// Re-checks a recorded step against its rule schema.
bool validate_step(const ProofStep& step);

struct Derivation {
    bool success = false;
    std::vector<ProofStep> steps;          // a minimal witnessing sequence
    std::vector<Statement> underivable;    // goals that could not be reached
};

/// Forward chaining to a fixpoint (or the round bound). The freshness rule
/// instantiates only conjunction terms already present in the knowledge
/// base, so saturation terminates. Succeeds when every goal is derived;
/// steps are returned in dependency order, restricted to those the goals
/// need.
Derivation derive(std::span<const Statement> assumptions,
                  std::span<const Statement> messages,
                  std::span<const Statement> goals, unsigned max_depth = 16);

/// A labeled statement list: sections [assumptions], [messages], [goals],
/// one `Label: statement` per line. Labels may repeat to group several
/// statements under one assumption name.
struct Fixture {
    std::vector<std::pair<std::string, Statement>> assumptions;
    std::vector<std::pair<std::string, Statement>> messages;
    std::vector<std::pair<std::string, Statement>> goals;

    std::vector<Statement> assumption_statements() const;
    std::vector<Statement> message_statements() const;
    std::vector<Statement> goal_statements() const;
    /// Assumptions with every statement labeled `label` removed.
    std::vector<Statement> assumptions_without(std::string_view label) const;
};

Fixture load_fixture(std::string_view text);

/// Numbered steps `<n>: <rule>(<refs>) => <statement>`, where refs are
/// fixture labels or earlier step numbers.
std::string format_proof(const Derivation& d, const Fixture& f);

}  // namespace varikey::banlogic

#endif
