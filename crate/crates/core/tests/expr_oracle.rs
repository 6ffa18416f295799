//! Parsed expressions against an independent tree evaluator.

use proptest::prelude::*;
use tqb_core::expr::parse;

#[derive(Debug, Clone)]
enum Tree {
    Num(f64),
    X,
    Neg(Box<Tree>),
    Bin(char, Box<Tree>, Box<Tree>),
    Call(&'static str, Box<Tree>),
}

impl Tree {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Tree::Num(v) => *v,
            Tree::X => x,
            Tree::Neg(a) => -a.eval(x),
            Tree::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    _ => a / b,
                }
            }
            Tree::Call(f, a) => {
                let a = a.eval(x);
                match *f {
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    _ => a.exp(),
                }
            }
        }
    }

    /// Fully parenthesised source text.
    fn source(&self) -> String {
        match self {
            Tree::Num(v) => format!("{v:?}"),
            Tree::X => "x".into(),
            Tree::Neg(a) => format!("(-{})", a.source()),
            Tree::Bin(op, a, b) => format!("({} {op} {})", a.source(), b.source()),
            Tree::Call(f, a) => format!("{f}({})", a.source()),
        }
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![(0.0f64..10.0).prop_map(Tree::Num), Just(Tree::X)];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Tree::Neg(Box::new(a))),
            (prop::sample::select(vec!['+', '-', '*', '/']), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Tree::Bin(op, Box::new(a), Box::new(b))),
            // the inner sin keeps exp arguments bounded
            (prop::sample::select(vec!["sin", "cos", "exp"]), inner)
                .prop_map(|(f, a)| Tree::Call(f, Box::new(Tree::Call("sin", Box::new(a))))),
        ]
    })
}

proptest! {
    #[test]
    fn parse_agrees_with_tree(t in tree(), x in -3.0f64..3.0) {
        let want = t.eval(x);
        prop_assume!(want.is_finite());
        let e = parse(&t.source()).unwrap();
        match e.evaluate(x) {
            Ok(got) => prop_assert!(got == want, "{} at {x}: {got} vs {want}", t.source()),
            // division by zero is reported instead of producing a non-finite value
            Err(_) => prop_assert!(false, "{} failed at {x}", t.source()),
        }
    }

    #[test]
    fn display_round_trips(t in tree(), x in -3.0f64..3.0) {
        let e = parse(&t.source()).unwrap();
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(e.evaluate(x).ok(), again.evaluate(x).ok());
    }
}

#[test]
fn fourier_sum_against_loop() {
    let e = parse("0.919145 + 0.001*sum(j, 1, 25, cos(2*pi*j*x)/j)").unwrap();
    for x in [-1.0, -0.37, 0.0, 0.5, 0.99] {
        let want = 0.919145
            + 0.001
                * (1..=25)
                    .map(|j| (2.0 * std::f64::consts::PI * j as f64 * x).cos() / j as f64)
                    .sum::<f64>();
        assert!((e.evaluate(x).unwrap() - want).abs() < 1e-15);
    }
}
