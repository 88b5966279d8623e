//! Expressions in `x1, x2, z` used to check jet derivatives against finite
//! differences. Every elementary function and both kinds of exponent appear.
//! All are smooth on [`CORPUS_BOX`].

pub const AD_CORPUS: &[&str] = &[
    "x1*x2*z",
    "x1^3 - 2*x2^2*z + z^4",
    "1/(1 + x1^2 + x2^2 + z^2)",
    "(x1 + x2 + z + 1)^(3/13)",
    "z^(-7/29)*x1",
    "(1 + x1^2 + x2^2 + z^2)^(-2)/2",
    "sqrt(1 + x1^2 + x2^2)",
    "sqrt(x1*z + 2)^(5/3)",
    "exp(x1 - z)",
    "exp(-x1*x2*z/4)*z",
    "ln(1 + x1^2 + z)",
    "ln(z)*x2 - ln(x1 + 3)",
    "sin(x1 + 2*x2) * cos(z)",
    "cos(x1*x2) + sin(z)^2",
    "atan(z/x1)",
    "atan(x1*x2 - z)",
    "abs(x1 - 4) * z",
    "abs(x2 + z + 3)^(1/3)",
    "z^(2/5)",
    "z^(15/29)*exp(x2)",
    "(c1*z + c2)^(-1)",
    "((c1*x1 + c2)*(c3*z + c4))^(-1)",
    "2*r^3/(-2*r*z - 2*(r^2 + z^2)*atan(z/r) + 6*r^3*(r^2 + z^2))",
    "(exp(x2) + exp(-x2))/2",
    "x1/(x2 + 3) - z/(x1 + 2)",
    "(x1^2 + 1)^(1/2)*(z^2 + 1)^(-1/2)",
    "sin(atan(x1))*sqrt(z)",
    "exp(sin(x2))*ln(z + 1)",
    "cos(sqrt(x1^2 + z))",
    "(2 + sin(x1))^(-3/4)",
    "z^0.25*x2^2",
    "atan(exp(-z))*abs(x1 - 5)",
    "(x1 + x2 + z + C)^(-1)*x1",
    "k^2*(1 + x1^2 + x2^2)^2/4",
];

/// Parameters bound while evaluating the corpus.
pub const CORPUS_PARAMS: &[(&str, f64)] =
    &[("c1", 1.3), ("c2", 0.7), ("c3", 0.9), ("c4", 1.1), ("r", 1.2), ("C", 1.0), ("k", 6.0)];

/// `(x1, x2, z)` sampling box.
pub const CORPUS_BOX: [(f64, f64); 3] = [(0.2, 1.5), (-1.0, 1.0), (0.5, 2.0)];
