use nilcollect::{BigInt, Error, Expr, GroupContext};

const CORPUS: [&str; 50] = [
    "a",
    "b",
    "ab",
    "ba",
    "a^-1",
    "b^-1 a^-1 b a",
    "(ab)^256",
    "(ab)^-7",
    "b^-32 a^-32 (ab)^32",
    "[b,a]",
    "[b,a,a]",
    "[b,a,b]",
    "[b,a,a,a]",
    "[b,a,a,b]",
    "[b,a,b,b]",
    "[b,a,a,[b,a]]",
    "[b,a,b,[b,a]]",
    "[[b,a],[b,a,a]]",
    "[b^2, a]",
    "[b^5, a, a]",
    "[b^32, a^-1]",
    "[ab, ba]",
    "[a b^-1, b a]",
    "[(ab)^3, a]",
    "[b,a]^128",
    "[b,a]^-4",
    "(a^2 b^3)^5",
    "((ab)^2 a)^3",
    "a^0",
    "a b a b a",
    "a^1 b^1",
    "[a,b] [b,a]",
    "[b,a,a]^-1 [b,a,b]^2",
    "[b, a, a, a, a]",
    "[b,a,a,a,b]",
    "[[b,a,a,a,b],[b,a,a,a,a]]",
    "(b a^-1)^4",
    "[b^-1, a^-1]",
    "[(a b)^2, (b a)^-2]",
    "a^123456789012345678901234567890",
    "(ab)^-123456789012345678901234567890",
    "[b^4, a^2, b]",
    "[b,a]^2 [b,a,b]",
    "  a   b  ",
    "(a)",
    "((a))^2",
    "[a,[a,b]]",
    "[[a,b],a,b]",
    "b^-1 (ab)^2 b",
    "[b,a,b,b]^3 (ab)^-1",
];

#[test]
fn round_trip_corpus() {
    let gens = ["a", "b"];
    for text in CORPUS {
        let e = Expr::parse(text, &gens).unwrap_or_else(|err| panic!("{text}: {err}"));
        let printed = e.to_string();
        let again = Expr::parse(&printed, &gens).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(e, again, "{text} printed as {printed}");
    }
}

#[test]
fn printed_form_evaluates_identically() {
    let ctx = GroupContext::<BigInt>::free(&["a", "b"], 5).unwrap();
    for text in CORPUS {
        let e = Expr::parse(text, &["a", "b"]).unwrap();
        let again = Expr::parse(&e.to_string(), &["a", "b"]).unwrap();
        assert_eq!(ctx.eval(&e).unwrap(), ctx.eval(&again).unwrap(), "{text}");
    }
}

#[test]
fn tree_shapes() {
    let e = Expr::parse("[b,a,a,[b,a]]", &["a", "b"]).unwrap();
    let ba = || Expr::bracket(Expr::gen("b"), Expr::gen("a"));
    let want = Expr::bracket(Expr::bracket(ba(), Expr::gen("a")), ba());
    assert_eq!(e, want);
    let p = Expr::parse("(ab)^256", &["a", "b"]).unwrap();
    assert_eq!(p, Expr::product(vec![Expr::gen("a"), Expr::gen("b")]).pow(256));
}

#[test]
fn errors_carry_positions() {
    let gens = ["a", "b"];
    assert!(matches!(Expr::parse("a x", &gens), Err(Error::Syntax { pos: 2, msg }) if msg.contains("`x`")));
    assert!(matches!(Expr::parse("[a,b", &gens), Err(Error::Syntax { pos: 4, .. })));
    assert!(matches!(Expr::parse("a^", &gens), Err(Error::Syntax { pos: 2, .. })));
    assert!(matches!(Expr::parse("", &gens), Err(Error::Syntax { pos: 0, .. })));
}

#[test]
fn multi_letter_names_need_separators() {
    let gens = ["x1", "y1"];
    let e = Expr::parse("x1 y1 [y1, x1]^2", &gens).unwrap();
    assert_eq!(Expr::parse(&e.to_string(), &gens).unwrap(), e);
}
