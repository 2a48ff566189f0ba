#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "plapvar/error.hpp"

namespace plapvar {

/// Values bound to the variables an expression may reference.
struct ExprScope {
    double x = 0.0, y = 0.0, lambda1 = 0.0, p = 2.0;
};

/// Arithmetic expression over x, y, lambda1, p and the constants pi, e.
/// Grammar: + - * / ^ (right-associative), unary minus, parentheses and
/// the functions sin cos tan exp log sqrt abs sign step bump (one argument)
/// and min max pow (two). step(t) is 1 for t >= 0; bump(t) is
/// exp(1 - 1/(1 - t^2)) on |t| < 1 and 0 elsewhere.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string &text) {
        Parser ps{text, 0, {}};
        Expression e;
        e.text_ = text;
        e.eval_ = ps.expression();
        ps.skip();
        if (ps.pos != text.size()) ps.fail("unexpected '" + std::string(1, text[ps.pos]) + "'");
        e.vars_ = std::move(ps.vars);
        return e;
    }

    double operator()(const ExprScope &s) const { return eval_(s); }
    const std::string &text() const { return text_; }
    bool uses(const std::string &var) const { return vars_.count(var) > 0; }
    const std::set<std::string> &variables() const { return vars_; }

private:
    using Node = std::function<double(const ExprScope &)>;

    struct Parser {
        const std::string &s;
        std::size_t pos;
        std::set<std::string> vars;

        [[noreturn]] void fail(const std::string &msg) const {
            throw Error("cli", "expression", msg + " at position " + std::to_string(pos) + " in \"" + s + "\"");
        }
        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        Node expression() {
            Node lhs = term();
            for (;;) {
                if (eat('+')) lhs = [a = lhs, b = term()](const ExprScope &v) { return a(v) + b(v); };
                else if (eat('-')) lhs = [a = lhs, b = term()](const ExprScope &v) { return a(v) - b(v); };
                else return lhs;
            }
        }
        Node term() {
            Node lhs = unary();
            for (;;) {
                if (eat('*')) lhs = [a = lhs, b = unary()](const ExprScope &v) { return a(v) * b(v); };
                else if (eat('/')) lhs = [a = lhs, b = unary()](const ExprScope &v) { return a(v) / b(v); };
                else return lhs;
            }
        }
        Node unary() {
            if (eat('-')) return [a = unary()](const ExprScope &v) { return -a(v); };
            if (eat('+')) return unary();
            return power();
        }
        Node power() {
            Node base = primary();
            if (eat('^')) return [a = base, b = unary()](const ExprScope &v) { return std::pow(a(v), b(v)); };
            return base;
        }
        Node primary() {
            skip();
            if (pos >= s.size()) fail("unexpected end");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                Node inner = expression();
                if (!eat(')')) fail("missing ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double val = 0.0;
                try {
                    val = std::stod(s.substr(pos), &used);
                } catch (...) {
                    fail("bad number");
                }
                pos += used;
                return [val](const ExprScope &) { return val; };
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                const std::string name = s.substr(start, pos - start);
                if (eat('(')) return call(name);
                return variable(name);
            }
            fail("unexpected '" + std::string(1, c) + "'");
        }
        Node variable(const std::string &name) {
            if (name == "pi") return [](const ExprScope &) { return std::numbers::pi; };
            if (name == "e") return [](const ExprScope &) { return std::numbers::e; };
            vars.insert(name);
            if (name == "x") return [](const ExprScope &v) { return v.x; };
            if (name == "y") return [](const ExprScope &v) { return v.y; };
            if (name == "lambda1") return [](const ExprScope &v) { return v.lambda1; };
            if (name == "p") return [](const ExprScope &v) { return v.p; };
            fail("unknown variable '" + name + "'");
        }
        Node call(const std::string &name) {
            std::vector<Node> args{expression()};
            while (eat(',')) args.push_back(expression());
            if (!eat(')')) fail("missing ')'");
            static const std::map<std::string, double (*)(double)> unary_fns = {
                {"sin", [](double t) { return std::sin(t); }},
                {"cos", [](double t) { return std::cos(t); }},
                {"tan", [](double t) { return std::tan(t); }},
                {"exp", [](double t) { return std::exp(t); }},
                {"log", [](double t) { return std::log(t); }},
                {"sqrt", [](double t) { return std::sqrt(t); }},
                {"abs", [](double t) { return std::abs(t); }},
                {"sign", [](double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }},
                {"step", [](double t) { return t >= 0 ? 1.0 : 0.0; }},
                {"bump", [](double t) { return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0; }},
            };
            static const std::map<std::string, double (*)(double, double)> binary_fns = {
                {"min", [](double a, double b) { return std::min(a, b); }},
                {"max", [](double a, double b) { return std::max(a, b); }},
                {"pow", [](double a, double b) { return std::pow(a, b); }},
            };
            if (auto it = unary_fns.find(name); it != unary_fns.end()) {
                if (args.size() != 1) fail(name + " takes one argument");
                return [f = it->second, a = args[0]](const ExprScope &v) { return f(a(v)); };
            }
            if (auto it = binary_fns.find(name); it != binary_fns.end()) {
                if (args.size() != 2) fail(name + " takes two arguments");
                return [f = it->second, a = args[0], b = args[1]](const ExprScope &v) { return f(a(v), b(v)); };
            }
            fail("unknown function '" + name + "'");
        }
    };

    std::string text_;
    Node eval_;
    std::set<std::string> vars_;
};

}  // namespace plapvar
