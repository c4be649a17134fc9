//! Algebraic identities of the frame operators, checked symbolically on
//! generic fields and numerically against plain matrix actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adapted::{apply_costar, apply_operator, AdaptedVectorField, Connection, FrameOperator};
use crate::check::CheckLine;
use crate::error::Result;
use crate::forms::AdaptedForm;
use crate::symbolic::random::random_expr;
use crate::symbolic::{evaluate, Expr, Point, Var};

pub const NUMERIC_POINTS: usize = 100;
pub const NUMERIC_REL_TOL: f64 = 1e-12;

type FieldMap = fn(&AdaptedVectorField) -> Result<AdaptedVectorField>;

fn op(o: FrameOperator) -> impl Fn(&AdaptedVectorField) -> AdaptedVectorField {
    move |x| apply_operator(o, x).expect("operator acts on vector fields")
}

/// Identities on vector fields: name, left side, right side.
fn field_identities() -> Vec<(&'static str, FieldMap, FieldMap)> {
    use FrameOperator::{F, H, J, V};
    vec![
        ("F^2 = -I", |x| Ok(op(F)(&op(F)(x))), |x| Ok(x.neg())),
        ("h + v = I", |x| Ok(op(H)(x).add(&op(V)(x))), |x| Ok(x.clone())),
        ("h^2 = h", |x| Ok(op(H)(&op(H)(x))), |x| Ok(op(H)(x))),
        ("v^2 = v", |x| Ok(op(V)(&op(V)(x))), |x| Ok(op(V)(x))),
        ("hv = 0", |x| Ok(op(H)(&op(V)(x))), |x| Ok(AdaptedVectorField::zero(x.n()))),
        ("vh = 0", |x| Ok(op(V)(&op(H)(x))), |x| Ok(AdaptedVectorField::zero(x.n()))),
        ("J^2 = 0", |x| Ok(op(J)(&op(J)(x))), |x| Ok(AdaptedVectorField::zero(x.n()))),
    ]
}

/// Matrix action of each identity's left side on a numeric vector
/// `(h^1..h^n, v^1..v^n)`.
fn numeric_left(name: &str, u: &[f64]) -> Vec<f64> {
    let n = u.len() / 2;
    let (h, v) = u.split_at(n);
    let zeros = vec![0.0; n];
    let cat = |a: &[f64], b: &[f64]| [a, b].concat();
    let neg = |a: &[f64]| a.iter().map(|x| -x).collect::<Vec<_>>();
    match name {
        // F(h, v) = (v, −h)
        "F^2 = -I" => {
            let f = cat(v, &neg(h));
            let (fh, fv) = f.split_at(n);
            cat(fv, &neg(fh))
        }
        "h + v = I" => cat(h, &zeros).iter().zip(cat(&zeros, v)).map(|(a, b)| a + b).collect(),
        "h^2 = h" => cat(h, &zeros),
        "v^2 = v" => cat(&zeros, v),
        "hv = 0" | "vh = 0" | "J^2 = 0" => cat(&zeros, &zeros),
        "F*^2 = -I" => {
            // F*(a, b) = (b, −a) on covectors
            let f = cat(v, &neg(h));
            let (fa, fb) = f.split_at(n);
            cat(fb, &neg(fa))
        }
        _ => unreachable!("unknown identity {name}"),
    }
}

fn fstar(f: &AdaptedForm, conn: &Connection) -> AdaptedForm {
    apply_costar(FrameOperator::Fstar, f, conn).expect("F* acts on 1-forms")
}

fn components(x: &AdaptedVectorField) -> Vec<Expr> {
    x.h.iter().chain(&x.v).cloned().collect()
}

fn form_components(f: &AdaptedForm) -> Vec<Expr> {
    (0..2 * f.n()).map(|p| f.comp(p).clone()).collect()
}

/// Runs every identity in dimension `n`: symbolically on a field with
/// parameter components, then numerically at [`NUMERIC_POINTS`] random
/// points for a field with random expression components.
pub fn operator_identities(n: usize, seed: u64) -> Vec<CheckLine> {
    let conn = Connection::zero(n);
    let generic = AdaptedVectorField::generic(n, "u");
    let generic_form = AdaptedForm::one_form(
        (1..=n).map(|i| Expr::param(&format!("a{i}"))).collect(),
        (1..=n).map(|i| Expr::param(&format!("b{i}"))).collect(),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_field = AdaptedVectorField::new(
        (0..n).map(|_| random_expr(&mut rng, n, 3)).collect(),
        (0..n).map(|_| random_expr(&mut rng, n, 3)).collect(),
    )
    .expect("equal lengths");
    let random_form = AdaptedForm::one_form(random_field.h.clone(), random_field.v.clone());
    let points: Vec<Point> = (0..NUMERIC_POINTS).map(|_| random_point(&mut rng, n)).collect();

    let mut lines = Vec::new();
    for (name, lhs, rhs) in field_identities() {
        let mut details = Vec::new();
        if !lhs(&generic).unwrap().sym_eq(&rhs(&generic).unwrap()) {
            details.push(format!("symbolic failure for n = {n}"));
        }
        let got = components(&lhs(&random_field).unwrap());
        details.extend(numeric_mismatches(name, &components(&random_field), &got, &points));
        lines.push(CheckLine::new(format!("{name} (n = {n})"), details));
    }

    let mut details = Vec::new();
    if !fstar(&fstar(&generic_form, &conn), &conn).sym_eq(&generic_form.neg()) {
        details.push(format!("symbolic failure for n = {n}"));
    }
    let got = form_components(&fstar(&fstar(&random_form, &conn), &conn));
    details.extend(numeric_mismatches("F*^2 = -I", &form_components(&random_form), &got, &points));
    lines.push(CheckLine::new(format!("F*^2 = -I (n = {n})"), details));
    lines
}

fn random_point(rng: &mut impl Rng, n: usize) -> Point {
    let mut p = Point::new(n)
        .with(Var::T, rng.random_range(-1.5..1.5))
        .with_param("a", rng.random_range(-1.5..1.5))
        .with_param("b", rng.random_range(-1.5..1.5));
    for i in 0..n {
        p.set(Var::X(i), rng.random_range(-1.5..1.5));
        p.set(Var::Y(i), rng.random_range(-1.5..1.5));
    }
    p
}

/// Compares the symbolic result, evaluated at each point, with the matrix
/// action on the evaluated input.
fn numeric_mismatches(name: &str, input: &[Expr], got: &[Expr], points: &[Point]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, pt) in points.iter().enumerate() {
        let u: Vec<f64> = match input.iter().map(|e| evaluate(e, pt)).collect() {
            Ok(u) => u,
            Err(e) => {
                out.push(format!("point {k}: {e}"));
                continue;
            }
        };
        let want = numeric_left(name, &u);
        for (c, (g, w)) in got.iter().zip(&want).enumerate() {
            match evaluate(g, pt) {
                Ok(g) if (g - w).abs() <= NUMERIC_REL_TOL * w.abs().max(1.0) => {}
                Ok(g) => out.push(format!("point {k}, component {c}: {g} vs {w}")),
                Err(e) => out.push(format!("point {k}, component {c}: {e}")),
            }
        }
    }
    out
}
