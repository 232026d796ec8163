#include "thermovisco/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thermovisco {

namespace {

using Fn = std::function<double(const Expression::Vars&)>;

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Fn parse() {
        Fn f = expr();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        }
        return f;
    }

    bool uses_time = false;
    bool uses_space = false;

private:
    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream os;
        os << "expression '" << s_ << "': " << what << " at position " << pos_;
        throw ExpressionError(os.str());
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Fn expr() {
        Fn lhs = term();
        for (;;) {
            if (eat('+')) {
                Fn rhs = term();
                lhs = [lhs, rhs](const auto& v) { return lhs(v) + rhs(v); };
            } else if (eat('-')) {
                Fn rhs = term();
                lhs = [lhs, rhs](const auto& v) { return lhs(v) - rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn term() {
        Fn lhs = unary();
        for (;;) {
            if (eat('*')) {
                Fn rhs = unary();
                lhs = [lhs, rhs](const auto& v) { return lhs(v) * rhs(v); };
            } else if (eat('/')) {
                Fn rhs = unary();
                lhs = [lhs, rhs](const auto& v) { return lhs(v) / rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn unary() {
        if (eat('-')) {
            Fn f = unary();
            return [f](const auto& v) { return -f(v); };
        }
        if (eat('+')) {
            return unary();
        }
        return power();
    }

    Fn power() {
        Fn base = primary();
        if (eat('^')) {
            Fn ex = unary();
            return [base, ex](const auto& v) { return std::pow(base(v), ex(v)); };
        }
        return base;
    }

    Fn primary() {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of input");
        }
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Fn f = expr();
            if (!eat(')')) {
                fail("expected ')'");
            }
            return f;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            if (end == begin) {
                fail("bad number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            return [value](const auto&) { return value; };
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x" || name == "y" || name == "z" || name == "t") {
                const std::size_t idx = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : 3;
                (idx == 3 ? uses_time : uses_space) = true;
                return [idx](const auto& v) { return v[idx]; };
            }
            if (name == "pi") {
                return [](const auto&) { return std::numbers::pi; };
            }
            if (name == "e") {
                return [](const auto&) { return std::numbers::e; };
            }
            double (*fn)(double) = nullptr;
            if (name == "sin") {
                fn = [](double a) { return std::sin(a); };
            } else if (name == "cos") {
                fn = [](double a) { return std::cos(a); };
            } else if (name == "exp") {
                fn = [](double a) { return std::exp(a); };
            } else if (name == "sqrt") {
                fn = [](double a) { return std::sqrt(a); };
            } else {
                pos_ = start;
                fail("unknown name '" + name + "'");
            }
            if (!eat('(')) {
                fail("expected '(' after " + name);
            }
            Fn arg = expr();
            if (!eat(')')) {
                fail("expected ')'");
            }
            return [fn, arg](const auto& v) { return fn(arg(v)); };
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.eval_ = p.parse();
    e.text_ = text;
    e.uses_time_ = p.uses_time;
    e.is_constant_ = !p.uses_time && !p.uses_space;
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    e.eval_ = [value](const Vars&) { return value; };
    std::ostringstream os;
    os.precision(17);
    os << value;
    e.text_ = os.str();
    e.is_constant_ = true;
    return e;
}

}  // namespace thermovisco
