//! Coefficient expressions: parsing, evaluation, printing, and the piecewise
//! handling that keeps numeric gradients on one side of a breakpoint.
//!
//! ```bash
//! cargo run --release --example parse_expressions
//! ```

use conservd::expr::parse_expression;
use conservd::field::{numeric_gradient, ScalarField};

fn main() -> conservd::Result<()> {
    // Standard precedence, functions, and round-trip printing.
    for text in [
        "1 + 2 * 3^2",
        "(x1 + sqrt(2))^2",
        "min(x1, max(0, x2))",
        "piecewise(x1 > -1 ? 1 : abs(x1)^(-3))",
    ] {
        let ast = parse_expression(text, 2)?;
        let printed = ast.to_string();
        let reparsed = parse_expression(&printed, 2)?;
        assert_eq!(reparsed, ast);
        println!("{text:42} -> {printed}");
    }

    // Evaluation.
    let shifted = ScalarField::from_expr("(x1 + sqrt(2))^2", 1)?;
    println!("\n(x1 + sqrt(2))^2 at x = 0:   {}", shifted.value(&[0.0]));

    let inverse_cube = ScalarField::from_expr("piecewise(x1 > -1 ? 1 : abs(x1)^(-3))", 1)?;
    println!(
        "piecewise weight at x = -2:  {}",
        inverse_cube.value(&[-2.0])
    );

    // Parse errors carry byte positions.
    match parse_expression("x1 + log(", 1) {
        Err(e) => println!("\nexpected failure: {e}"),
        Ok(_) => unreachable!(),
    }

    // One-sided differencing at a breakpoint: the kink at 0 does not pollute
    // the derivative taken from the base point's side.
    let kinked = ScalarField::from_expr("piecewise(x1 >= 0 ? x1 : -5*x1)", 1)?;
    let grad = numeric_gradient(&kinked, &[1e-8], 1e-5)?;
    println!("\nslope just right of the kink: {:.6}", grad[0]);
    Ok(())
}
