#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

namespace thermovisco {

class ExpressionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Arithmetic expression over x, y, z, t.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numbers,
/// the constants pi and e, and the functions sin, cos, exp, sqrt.
class Expression {
public:
    using Vars = std::array<double, 4>;  // x, y, z, t

    /// Throws ExpressionError with the offending position.
    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double operator()(double x, double y = 0.0, double z = 0.0, double t = 0.0) const { return eval_({x, y, z, t}); }

    [[nodiscard]] const std::string& text() const { return text_; }
    [[nodiscard]] bool uses_time() const { return uses_time_; }
    [[nodiscard]] bool is_constant() const { return is_constant_; }

private:
    std::string text_;
    std::function<double(const Vars&)> eval_;
    bool uses_time_ = false;
    bool is_constant_ = false;
};

}  // namespace thermovisco
