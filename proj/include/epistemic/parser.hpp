#pragma once

// Recursive-descent parser for the formula grammar:
//
//   phi   := "true" | "false" | atom | "!" phi | "X" phi | phi "&&" phi | phi "||" phi
//          | phi "=>" phi | phi "<=>" phi | "K[" AGENT "](" phi ")"
//          | "Khat[" AGENT "](" var ")" | macro | "(" phi ")"
//   atom  := [AGENT "."] IDENT ["[" INT "]"] [("==" | "!=") VALUE]
//   macro := NAME "(" arg {"," arg} ")"
//
// Precedence: ! and X > && > || > (=>, <=>); binary operators are left
// associative. A variable without a comparison means "== 1". Macros are
// resolved through a caller-supplied table so the parser stays model-agnostic.

#include <cctype>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "formula.hpp"

namespace epi {

// Returns nullptr when the name is not a macro of the bound model.
using MacroTable =
    std::function<FormulaPtr(std::string_view name, std::span<const std::string> args)>;

namespace detail {

class FormulaParser {
public:
    FormulaParser(std::string_view text, const Signature& sig, const MacroTable& macros)
        : text_(text), sig_(sig), macros_(macros) {}

    FormulaPtr parse() {
        auto f = parse_equiv();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected input '" + std::string(text_.substr(pos_, 8)) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }

    static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string ident() {
        skip_ws();
        if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected identifier");
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    // Peek at an identifier without consuming it.
    std::string_view peek_ident() {
        skip_ws();
        std::size_t p = pos_;
        if (p >= text_.size() || !ident_start(text_[p])) return {};
        while (p < text_.size() && ident_char(text_[p])) ++p;
        return text_.substr(pos_, p - pos_);
    }

    Value integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            fail("expected integer");
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return static_cast<Value>(std::stol(std::string(text_.substr(start, pos_ - start))));
    }

    Value value() {
        if (accept("true")) return 1;
        if (accept("false")) return 0;
        return integer();
    }

    FormulaPtr parse_equiv() {
        auto lhs = parse_or();
        for (;;) {
            if (accept("<=>")) {
                lhs = f_iff(lhs, parse_or());
            } else if (accept("=>")) {
                lhs = f_implies(lhs, parse_or());
            } else {
                return lhs;
            }
        }
    }

    FormulaPtr parse_or() {
        auto lhs = parse_and();
        while (accept("||")) lhs = f_or(lhs, parse_and());
        return lhs;
    }

    FormulaPtr parse_and() {
        auto lhs = parse_unary();
        while (accept("&&")) lhs = f_and(lhs, parse_unary());
        return lhs;
    }

    FormulaPtr parse_unary() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '!' && text_.substr(pos_, 2) != "!=") {
            ++pos_;
            return f_not(parse_unary());
        }
        if (peek_ident() == "X") {
            pos_ += 1;
            return f_next(parse_unary());
        }
        return parse_primary();
    }

    AgentId agent_ref() {
        std::size_t at = pos_;
        auto name = ident();
        if (auto a = sig_.find_agent(name)) return *a;
        throw ParseError("unknown agent " + name, at);
    }

    FormulaPtr parse_primary() {
        skip_ws();
        if (accept("(")) {
            auto f = parse_equiv();
            expect(")");
            return f;
        }
        auto word = peek_ident();
        if (word.empty()) fail("expected formula");
        if (word == "true" || word == "false") {
            pos_ += word.size();
            return word == "true" ? f_true() : f_false();
        }
        if ((word == "K" || word == "Khat") && text_.substr(pos_ + word.size(), 1) == "[") {
            bool khat = word == "Khat";
            pos_ += word.size();
            expect("[");
            AgentId a = agent_ref();
            expect("]");
            expect("(");
            FormulaPtr out;
            if (khat) {
                std::size_t at = pos_;
                auto f = parse_atom();
                if (f->kind() == NodeKind::Atom) {
                    out = f_knows_value(sig_, a, f->atom().var);
                } else if (f->kind() == NodeKind::Not && f->lhs()->kind() == NodeKind::Atom) {
                    out = f_knows_value(sig_, a, f->lhs()->atom().var);
                } else {
                    throw ParseError("Khat expects a variable", at);
                }
            } else {
                out = f_know(a, parse_equiv());
            }
            expect(")");
            return out;
        }
        return parse_atom();
    }

    FormulaPtr parse_atom() {
        std::size_t at = pos_;
        std::string name = ident();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            if (!sig_.find_agent(name)) throw ParseError("unknown agent " + name, at);
            ++pos_;
            name += "." + ident();
        }
        skip_ws();
        // Macro call
        if (pos_ < text_.size() && text_[pos_] == '(' && macros_) {
            ++pos_;
            std::vector<std::string> args;
            if (!accept(")")) {
                do {
                    skip_ws();
                    std::size_t s = pos_;
                    while (pos_ < text_.size() && (ident_char(text_[pos_]) || text_[pos_] == '-')) ++pos_;
                    if (s == pos_) fail("expected macro argument");
                    args.emplace_back(text_.substr(s, pos_ - s));
                } while (accept(","));
                expect(")");
            }
            FormulaPtr f;
            try {
                f = macros_(name, args);
            } catch (const UsageError& e) {
                throw ParseError(name + ": " + e.what(), at);
            }
            if (f) return f;
            throw ParseError("unknown macro " + name, at);
        }
        if (pos_ < text_.size() && text_[pos_] == '[') {
            std::size_t save = pos_;
            ++pos_;
            skip_ws();
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                name += "[" + std::to_string(integer()) + "]";
                expect("]");
            } else {
                pos_ = save;
            }
        }
        auto var = sig_.find_variable(name);
        if (!var) {
            if (auto hint = sig_.elimination_hint(name))
                throw ParseError("variable " + name + " is not available: " + *hint, at);
            throw ParseError("unknown variable " + name, at);
        }
        Cmp cmp = Cmp::Eq;
        Value v = 1;
        if (accept("==")) {
            v = value();
        } else if (accept("!=")) {
            cmp = Cmp::Ne;
            v = value();
        }
        if (!sig_.decl(*var).domain.contains(v))
            throw ParseError("value " + std::to_string(v) + " outside the domain of " + name, at);
        return f_atom(*var, cmp, v);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    const Signature& sig_;
    const MacroTable& macros_;
};

}  // namespace detail

inline FormulaPtr parse_formula(std::string_view text, const Signature& sig,
                                const MacroTable& macros = {}) {
    return detail::FormulaParser(text, sig, macros).parse();
}

}  // namespace epi
