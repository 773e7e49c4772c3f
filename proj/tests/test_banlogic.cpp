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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "varikey/banlogic.hpp"

using namespace varikey;
using namespace varikey::banlogic;

namespace {

std::string read_fixture_file() {
    std::ifstream in(std::string(VARIKEY_TEST_DATA_DIR) + "/fixtures/paper.ban");
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("statement parsing") {
    Statement s = parse_statement("R |= #(Nt)");
    CHECK(s == believes("R", fresh(atom("Nt"))));

    CHECK(parse_statement("R |= T |~ (Nt,S)") ==
          believes("R", said("T", conj(atom("Nt"), atom("S")))));
    CHECK(parse_statement("R <- enc((Nt,S),key_base)") ==
          sees("R", encrypted(conj(atom("Nt"), atom("S")), "key_base")));
    CHECK(parse_statement("S |= R => (Nr+1,ID)") ==
          believes("S", controls("R", conj(atom("Nr+1"), atom("ID")))));
    CHECK(parse_statement("R |= key(T,R,key_base)") ==
          believes("R", shared_key("T", "R", "key_base")));

    // lists nest to the right
    CHECK(parse_statement("(a,b,c)") ==
          conj(atom("a"), conj(atom("b"), atom("c"))));

    CHECK_THROWS_AS(parse_statement("R |="), BanParseError);
    CHECK_THROWS_AS(parse_statement(""), BanParseError);
    CHECK_THROWS_AS(parse_statement("(a,b"), BanParseError);
    CHECK_THROWS_AS(parse_statement("R |= T |~"), BanParseError);
    CHECK_THROWS_AS(parse_statement("#(X) |= Y"), BanParseError);

    // error position is reported
    try {
        parse_statement("R |= ");
        FAIL("expected BanParseError");
    } catch (const BanParseError& e) {
        CHECK(e.pos == 5);
    }
}

TEST_CASE("print and reparse round-trip over the whole fixture") {
    Fixture f = load_fixture(read_fixture_file());
    CHECK(f.assumptions.size() == 18);  // 16 labels, two of them two-line
    CHECK(f.messages.size() == 6);
    CHECK(f.goals.size() == 6);

    auto roundtrip = [](const Statement& s) {
        CHECK(parse_statement(to_string(s)) == s);
    };
    for (const auto& [l, s] : f.assumptions) roundtrip(s);
    for (const auto& [l, s] : f.messages) roundtrip(s);
    for (const auto& [l, s] : f.goals) roundtrip(s);
}

TEST_CASE("rule schemas") {
    Statement a1 = parse_statement("R |= key(T,R,key_base)");
    Statement m1 = parse_statement("R <- enc((Nt,S),key_base)");
    std::vector<Statement> prem{a1, m1};
    auto said_nt = apply_rule(Rule::R1, prem);
    REQUIRE(said_nt.has_value());
    CHECK(*said_nt == parse_statement("R |= T |~ (Nt,S)"));

    // freshness promotion with S on the right
    Statement a2 = parse_statement("R |= #(Nt)");
    Statement target = parse_statement("(Nt,S)");
    auto fresh_pair = apply_rule(Rule::R4, std::span(&a2, 1), &target);
    REQUIRE(fresh_pair.has_value());
    CHECK(*fresh_pair == parse_statement("R |= #((Nt,S))"));

    // freshness promotion with the premise on the right component
    Statement a8 = parse_statement("R |= #((Sd,Sp,Sc))");
    Statement target2 = parse_statement("(Nr,Sd,Sp,Sc)");
    auto fresh_quad = apply_rule(Rule::R4, std::span(&a8, 1), &target2);
    REQUIRE(fresh_quad.has_value());
    CHECK(*fresh_quad == parse_statement("R |= #((Nr,Sd,Sp,Sc))"));

    auto nonce = apply_rule(
        Rule::R2, std::vector<Statement>{*fresh_pair, *said_nt});
    REQUIRE(nonce.has_value());
    CHECK(*nonce == parse_statement("R |= T |= (Nt,S)"));

    Statement a3 = parse_statement("R |= T => (Nt,S)");
    auto goal = apply_rule(Rule::R3, std::vector<Statement>{a3, *nonce});
    REQUIRE(goal.has_value());
    CHECK(*goal == parse_statement("R |= (Nt,S)"));

    // mismatched premises are not applicable, not an error
    CHECK(!apply_rule(Rule::R3, prem).has_value());
    CHECK(!apply_rule(Rule::R1, std::vector<Statement>{m1, a1}).has_value());
    CHECK(!apply_rule(Rule::R2, std::vector<Statement>{a1}).has_value());

    // wrong key atom blocks the message-meaning rule
    Statement m5 = parse_statement("R <- enc((Nt+1,ID),key_new)");
    CHECK(!apply_rule(Rule::R1, std::vector<Statement>{a1, m5}).has_value());
    Statement a1new = parse_statement("R |= key(T,R,key_new)");
    CHECK(apply_rule(Rule::R1, std::vector<Statement>{a1new, m5}).has_value());
}

TEST_CASE("the six goals derive from the paper fixture") {
    Fixture f = load_fixture(read_fixture_file());
    Derivation d = derive(f.assumption_statements(), f.message_statements(),
                          f.goal_statements());
    REQUIRE(d.success);
    CHECK(d.underivable.empty());

    // each goal chain runs message-meaning, freshness, nonce-verification,
    // jurisdiction: four steps per goal, all revalidating under their schema
    CHECK(d.steps.size() == 24);
    for (const ProofStep& s : d.steps) CHECK(validate_step(s));

    // the full intermediate chain for the first goal is present
    auto contains = [&](std::string_view text) {
        Statement want = parse_statement(std::string(text));
        for (const ProofStep& s : d.steps) {
            if (s.conclusion == want) return true;
        }
        return false;
    };
    CHECK(contains("R |= T |~ (Nt,S)"));
    CHECK(contains("R |= #((Nt,S))"));
    CHECK(contains("R |= T |= (Nt,S)"));
    CHECK(contains("R |= (Nt,S)"));
    // and the final-message chains bind through the derived key
    CHECK(contains("R |= T |~ (Nt+1,ID)"));
    CHECK(contains("R |= #((Nt+1,ID))"));
    CHECK(contains("R |= T |= (Nt+1,ID)"));
    CHECK(contains("S |= R |~ (Nr+1,ID)"));
    CHECK(contains("S |= #((Nr+1,ID))"));
    CHECK(contains("S |= R |= (Nr+1,ID)"));

    std::string proof = format_proof(d, f);
    CHECK(proof.find("R1(") != std::string::npos);
    CHECK(proof.find("=> R |= (Nt,S)") != std::string::npos);
    CHECK(proof.find('?') == std::string::npos);  // every premise resolves
}

TEST_CASE("ablating any load-bearing assumption breaks a goal") {
    Fixture f = load_fixture(read_fixture_file());
    for (const char* label : {"A1", "A3", "A4", "A6", "A7", "A9", "A10", "A12",
                              "A14", "A16"}) {
        Derivation d = derive(f.assumptions_without(label),
                              f.message_statements(), f.goal_statements());
        CHECK_FALSE(d.success);
        CHECK(!d.underivable.empty());
    }

    // specifically: jurisdiction over the first pair gates the first goal
    Derivation d = derive(f.assumptions_without("A3"), f.message_statements(),
                          f.goal_statements());
    bool g1_missing = false;
    for (const Statement& s : d.underivable) {
        g1_missing |= s == parse_statement("R |= (Nt,S)");
    }
    CHECK(g1_missing);
}

TEST_CASE("empty goal list trivially succeeds") {
    Fixture f = load_fixture(read_fixture_file());
    Derivation d = derive(f.assumption_statements(), f.message_statements(), {});
    CHECK(d.success);
    CHECK(d.steps.empty());
}

TEST_CASE("adding assumptions never removes a derivable goal") {
    Fixture f = load_fixture(read_fixture_file());
    auto assumptions = f.assumption_statements();
    Derivation base = derive(assumptions, f.message_statements(),
                             f.goal_statements());
    REQUIRE(base.success);

    std::vector<Statement> extra{
        parse_statement("T |= #(Nt)"),
        parse_statement("R |= key(S,R,key_new)"),
        parse_statement("T |= S => (Nt,S)"),
    };
    for (const Statement& e : extra) {
        auto grown = assumptions;
        grown.push_back(e);
        Derivation d = derive(grown, f.message_statements(), f.goal_statements());
        CHECK(d.success);
    }
}

TEST_CASE("fixture loader rejects malformed input") {
    CHECK_THROWS_AS(load_fixture("A1: R |= #(Nt)\n"), DecodeError);
    CHECK_THROWS_AS(load_fixture("[assumptions]\nno label here\n"), DecodeError);
    CHECK_THROWS_AS(load_fixture("[assumptions]\nA1: R |=\n"), BanParseError);
}
