//! Line-oriented text format for circuits.
//!
//! ```text
//! modes 3                     # first statement
//! sqz 1 0.8
//! bs 1 2 0.7853981633974483
//! measure q 1 eta=0.95 -> mu
//! cdisp q 2 -1.4142135623730951*mu+0.1
//! cgate phase 0 0.5*mu
//! init 0 0.3 1.0 -1.0         # mode r q p
//! ```
//!
//! Affine expressions are single tokens without spaces. Numbers are decimal
//! doubles; [`format`] writes the shortest representation that reads back to
//! the same bits.

use std::fmt;

use crate::circuit::{validate, AffineExpr, Circuit, GateKind, Instruction, Param};
use crate::measurement::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// 1-based line and inclusive column range (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let s = self.span;
        write!(f, "{}:{}-{}: {sev}: {}", s.line, s.col_start, s.col_end, self.message)
    }
}

/// A parsed circuit with its non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub circuit: Circuit,
    pub warnings: Vec<ParseDiagnostic>,
    /// Source line of each instruction.
    pub lines: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    span: SourceSpan,
}

fn tokenize(line_no: usize, line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (byte, ch) in code.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { text: &code[b..byte], span: SourceSpan { line: line_no, col_start: c, col_end: col - 1 } });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &code[b..], span: SourceSpan { line: line_no, col_start: c, col_end: col } });
    }
    out
}

type Res<T> = Result<T, ParseDiagnostic>;

fn error(span: SourceSpan, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic { span, message: message.into(), severity: Severity::Error }
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan { line: a.line, col_start: a.col_start, col_end: b.col_end.max(a.col_start) }
}

fn after(tokens: &[Token]) -> SourceSpan {
    let last = tokens.last().map(|t| t.span).unwrap_or(SourceSpan { line: 1, col_start: 1, col_end: 0 });
    SourceSpan { line: last.line, col_start: last.col_end + 1, col_end: last.col_end + 1 }
}

/// Position just past the last argument, or past the statement head.
fn after_args(head: &Token, args: &[Token]) -> SourceSpan {
    after(args.last().map_or(std::slice::from_ref(head), std::slice::from_ref))
}

fn number(tok: &Token) -> Res<f64> {
    match tok.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(error(tok.span, format!("expected a finite number, got `{}`", tok.text))),
        Err(_) => Err(error(tok.span, format!("expected a number, got `{}`", tok.text))),
    }
}

fn mode(tok: &Token) -> Res<usize> {
    if !tok.text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(error(tok.span, format!("expected a mode index, got `{}`", tok.text)));
    }
    tok.text.parse().map_err(|_| error(tok.span, format!("mode index `{}` is too large", tok.text)))
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn quadrature(tok: &Token) -> Res<Quadrature> {
    tok.text.parse().map_err(|m: String| error(tok.span, m))
}

/// Length in bytes of the longest decimal-float prefix of `s`.
fn float_prefix(s: &[u8]) -> usize {
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < s.len() && s[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - start
    };
    let mut mantissa = digits(&mut i);
    if i < s.len() && s[i] == b'.' {
        i += 1;
        mantissa += digits(&mut i);
    }
    if mantissa == 0 {
        return 0;
    }
    if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
        let mut j = i + 1;
        if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
            j += 1;
        }
        if digits(&mut j) > 0 {
            i = j;
        }
    }
    i
}

/// `[±]term([±]term)*` with `term := number | number*reg | reg`.
fn expr(tok: &Token) -> Res<Param> {
    let bad = |why: &str| error(tok.span, format!("malformed expression `{}`: {why}", tok.text));
    let s = tok.text.as_bytes();
    let mut i = 0;
    let mut terms = Vec::new();
    let mut offset = 0.0;
    let mut first = true;
    while i < s.len() || first {
        let mut sign = 1.0;
        match s.get(i) {
            Some(b'+') => i += 1,
            Some(b'-') => {
                sign = -1.0;
                i += 1;
            }
            _ if !first => return Err(bad("expected `+` or `-` between terms")),
            _ => {}
        }
        first = false;
        let len = float_prefix(&s[i..]);
        if len > 0 {
            let v: f64 = tok.text[i..i + len].parse().map_err(|_| bad("invalid number"))?;
            i += len;
            if s.get(i) == Some(&b'*') {
                i += 1;
                let start = i;
                while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
                    i += 1;
                }
                let name = &tok.text[start..i];
                if !is_ident(name) {
                    return Err(bad("expected a register name after `*`"));
                }
                terms.push((sign * v, name.to_string()));
            } else {
                offset += sign * v;
            }
        } else {
            let start = i;
            while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
                i += 1;
            }
            let name = &tok.text[start..i];
            if !is_ident(name) {
                return Err(bad("expected a number or register name"));
            }
            terms.push((sign, name.to_string()));
        }
    }
    if !offset.is_finite() || terms.iter().any(|t| !t.0.is_finite()) {
        return Err(bad("non-finite coefficient"));
    }
    Ok(Param::affine(terms, offset))
}

fn arity(head: &Token, args: &[Token], expected: usize, usage: &str) -> Res<()> {
    if args.len() == expected {
        return Ok(());
    }
    let span = if args.len() > expected { join(args[expected].span, args[args.len() - 1].span) } else { after_args(head, args) };
    Err(error(span, format!("`{}` expects {expected} argument(s) ({usage}), got {}", head.text, args.len())))
}

fn in_unit(tok: &Token, v: f64, what: &str) -> Res<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(error(tok.span, format!("{what} outside [0,1]")))
    }
}

fn statement(head: &Token, args: &[Token], warnings: &mut Vec<ParseDiagnostic>) -> Res<Instruction> {
    let mut noop = |cond: bool, what: &str| {
        if cond {
            let span = join(head.span, args.last().map_or(head.span, |t| t.span));
            warnings.push(ParseDiagnostic { span, message: format!("{what} is a no-op"), severity: Severity::Warning });
        }
    };
    let ins = match head.text {
        "sqz" => {
            arity(head, args, 2, "mode, r")?;
            let r = number(&args[1])?;
            noop(r == 0.0, "squeezing by 0");
            Instruction::gate(GateKind::Sqz, &[mode(&args[0])?], &[r])
        }
        "disp" => {
            arity(head, args, 3, "mode, q, p")?;
            let (q, p) = (number(&args[1])?, number(&args[2])?);
            noop(q == 0.0 && p == 0.0, "displacement by (0, 0)");
            Instruction::gate(GateKind::Disp, &[mode(&args[0])?], &[q, p])
        }
        "fourier" => {
            arity(head, args, 1, "mode")?;
            Instruction::gate(GateKind::Fourier, &[mode(&args[0])?], &[])
        }
        "phase" => {
            arity(head, args, 2, "mode, eta")?;
            let eta = number(&args[1])?;
            noop(eta == 0.0, "phase gate with eta 0");
            Instruction::gate(GateKind::Phase, &[mode(&args[0])?], &[eta])
        }
        "sum" => {
            arity(head, args, 2, "control, target")?;
            let (c, t) = (mode(&args[0])?, mode(&args[1])?);
            if c == t {
                return Err(error(join(args[0].span, args[1].span), "control equals target"));
            }
            Instruction::gate(GateKind::Sum, &[c, t], &[])
        }
        "bs" => {
            arity(head, args, 3, "mode1, mode2, theta")?;
            let (a, b) = (mode(&args[0])?, mode(&args[1])?);
            if a == b {
                return Err(error(join(args[0].span, args[1].span), "beamsplitter modes must differ"));
            }
            let theta = number(&args[2])?;
            noop(theta == 0.0, "beamsplitter with theta 0");
            Instruction::gate(GateKind::Bs, &[a, b], &[theta])
        }
        "loss" => {
            arity(head, args, 2, "mode, eta")?;
            let m = mode(&args[0])?;
            let eta = in_unit(&args[1], number(&args[1])?, "transmissivity")?;
            noop(eta == 1.0, "loss with eta 1");
            Instruction::Loss { mode: m, eta }
        }
        "init" => {
            arity(head, args, 4, "mode, r, q, p")?;
            Instruction::Init {
                mode: mode(&args[0])?,
                squeeze: number(&args[1])?,
                displacement: (number(&args[2])?, number(&args[3])?),
            }
        }
        "measure" => {
            let usage = "q|p, mode, [eta=<efficiency>], ->, register";
            if args.len() != 4 && args.len() != 5 {
                return Err(error(
                    if args.is_empty() { after_args(head, args) } else { join(args[0].span, args[args.len() - 1].span) },
                    format!("`measure` expects `measure <q|p> <mode> [eta=<η>] -> <register>` ({usage})"),
                ));
            }
            let basis = quadrature(&args[0])?;
            let m = mode(&args[1])?;
            let mut efficiency = 1.0;
            if args.len() == 5 {
                let tok = &args[2];
                let Some(v) = tok.text.strip_prefix("eta=") else {
                    return Err(error(tok.span, format!("expected `eta=<efficiency>`, got `{}`", tok.text)));
                };
                let v = number(&Token { text: v, span: tok.span })?;
                efficiency = in_unit(tok, v, "efficiency")?;
            }
            let arrow = &args[args.len() - 2];
            if arrow.text != "->" {
                return Err(error(arrow.span, format!("expected `->`, got `{}`", arrow.text)));
            }
            let reg = &args[args.len() - 1];
            if !is_ident(reg.text) {
                return Err(error(reg.span, format!("invalid register name `{}`", reg.text)));
            }
            Instruction::Measure { mode: m, basis, efficiency, register: reg.text.to_string() }
        }
        "cdisp" => {
            arity(head, args, 3, "q|p, mode, expression")?;
            let basis = quadrature(&args[0])?;
            Instruction::conditional_displacement(mode(&args[1])?, basis, expr(&args[2])?)
        }
        "cgate" => {
            let Some(name) = args.first() else {
                return Err(error(after_args(head, args), "`cgate` expects a gate name"));
            };
            let Some(kind) = GateKind::from_mnemonic(name.text) else {
                return Err(error(name.span, format!("unknown gate `{}`", name.text)));
            };
            if kind.param_count() == 0 {
                return Err(error(name.span, format!("`{kind}` has no parameters to condition")));
            }
            let rest = &args[1..];
            let want = kind.arity() + kind.param_count();
            if rest.len() != want {
                let span = if rest.len() > want { join(rest[want].span, rest[rest.len() - 1].span) } else { after_args(head, args) };
                return Err(error(
                    span,
                    format!("`cgate {kind}` expects {} mode(s) and {} parameter(s)", kind.arity(), kind.param_count()),
                ));
            }
            let modes = rest[..kind.arity()].iter().map(mode).collect::<Res<Vec<_>>>()?;
            if modes.len() == 2 && modes[0] == modes[1] {
                return Err(error(join(rest[0].span, rest[1].span), "control equals target"));
            }
            let params = rest[kind.arity()..].iter().map(expr).collect::<Res<Vec<_>>>()?;
            Instruction::Gate { kind, modes, params }
        }
        other => return Err(error(head.span, format!("unknown statement `{other}`"))),
    };
    Ok(ins)
}

/// Parses a circuit. Never panics; every rejection carries spanned diagnostics.
pub fn parse(text: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut n: Option<usize> = None;
    let mut instructions = Vec::new();
    let mut lines = Vec::new();
    let mut spans = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(line_no, line);
        let Some((head, args)) = tokens.split_first() else { continue };
        let whole = join(head.span, args.last().map_or(head.span, |t| t.span));
        if head.text == "modes" {
            if n.is_some() {
                errors.push(error(head.span, "duplicate `modes` statement"));
                continue;
            }
            let parsed = arity(head, args, 1, "count").and_then(|()| mode(&args[0]));
            match parsed {
                Ok(0) => {
                    errors.push(error(args[0].span, "mode count must be at least 1"));
                    n = Some(0);
                }
                Ok(v) => n = Some(v),
                Err(d) => {
                    errors.push(d);
                    n = Some(0);
                }
            }
            continue;
        }
        if n.is_none() {
            errors.push(error(head.span, "`modes <n>` must come first"));
            n = Some(0);
        }
        match statement(head, args, &mut warnings) {
            Ok(ins) => {
                instructions.push(ins);
                lines.push(line_no);
                spans.push(whole);
            }
            Err(d) => errors.push(d),
        }
    }
    let Some(n) = n else {
        return Err(vec![error(SourceSpan { line: 1, col_start: 1, col_end: 1 }, "missing `modes <n>` statement")]);
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let circuit = Circuit::from_instructions(n, instructions);
    if let Err(diags) = validate(&circuit) {
        return Err(diags
            .into_iter()
            .map(|d| {
                let span = spans.get(d.instruction).copied().unwrap_or(SourceSpan { line: 1, col_start: 1, col_end: 1 });
                error(span, d.message)
            })
            .collect());
    }
    Ok(Parsed { circuit, warnings, lines })
}

/// [`parse`] for raw bytes; invalid UTF-8 is reported at its position.
pub fn parse_bytes(bytes: &[u8]) -> Result<Parsed, Vec<ParseDiagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            let col = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
            Err(vec![error(SourceSpan { line, col_start: col, col_end: col }, "invalid UTF-8")])
        }
    }
}

fn fmt_expr(out: &mut String, e: &AffineExpr) {
    use fmt::Write as _;
    for (i, (c, r)) in e.terms.iter().enumerate() {
        if i > 0 && !c.is_sign_negative() {
            out.push('+');
        }
        let _ = write!(out, "{c:?}*{r}");
    }
    if e.offset != 0.0 {
        if !e.offset.is_sign_negative() {
            out.push('+');
        }
        let _ = write!(out, "{:?}", e.offset);
    }
}

fn fmt_param(out: &mut String, p: &Param) {
    use fmt::Write as _;
    match p {
        Param::Const(v) => {
            let _ = write!(out, "{v:?}");
        }
        Param::Expr(e) => fmt_expr(out, e),
    }
}

/// Writes a circuit so that [`parse`] returns a structurally equal circuit.
pub fn format(circuit: &Circuit) -> String {
    use fmt::Write as _;
    let mut out = format!("modes {}\n", circuit.n());
    for ins in circuit.instructions() {
        match ins {
            Instruction::Gate { kind: GateKind::Disp, modes, params }
                if matches!(params.as_slice(), [Param::Expr(_), Param::Const(z)] | [Param::Const(z), Param::Expr(_)] if *z == 0.0) =>
            {
                let (basis, e) = match params.as_slice() {
                    [Param::Expr(e), _] => ("q", e),
                    [_, Param::Expr(e)] => ("p", e),
                    _ => unreachable!(),
                };
                let _ = write!(out, "cdisp {basis} {} ", modes[0]);
                fmt_expr(&mut out, e);
            }
            Instruction::Gate { kind, modes, params } => {
                if params.iter().any(|p| !p.is_const()) {
                    out.push_str("cgate ");
                }
                out.push_str(kind.mnemonic());
                for m in modes {
                    let _ = write!(out, " {m}");
                }
                for p in params {
                    out.push(' ');
                    fmt_param(&mut out, p);
                }
            }
            Instruction::Measure { mode, basis, efficiency, register } => {
                let _ = write!(out, "measure {basis} {mode}");
                if *efficiency != 1.0 {
                    let _ = write!(out, " eta={efficiency:?}");
                }
                let _ = write!(out, " -> {register}");
            }
            Instruction::Loss { mode, eta } => {
                let _ = write!(out, "loss {mode} {eta:?}");
            }
            Instruction::Init { mode, squeeze, displacement } => {
                let _ = write!(out, "init {mode} {squeeze:?} {:?} {:?}", displacement.0, displacement.1);
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{feed_forward_corpus, teleportation_circuit};
    use proptest::prelude::*;

    fn errors(text: &str) -> Vec<ParseDiagnostic> {
        parse(text).unwrap_err()
    }

    #[test]
    fn three_instruction_example() {
        let p = parse("modes 1\nsqz 0 0.5\nmeasure q 0 -> m0").unwrap();
        assert_eq!(p.circuit.n(), 1);
        assert_eq!(p.circuit.len(), 2);
        assert_eq!(p.lines, vec![2, 3]);
        assert_eq!(p.circuit.registers(), vec!["m0".to_string()]);
    }

    #[test]
    fn control_equals_target() {
        let d = errors("modes 2\nsum 0 0");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "control equals target");
        assert_eq!(d[0].span, SourceSpan { line: 2, col_start: 5, col_end: 7 });
    }

    #[test]
    fn efficiency_range() {
        let d = errors("modes 1\nmeasure q 0 eta=1.3 -> m0");
        assert_eq!(d[0].message, "efficiency outside [0,1]");
        assert_eq!(d[0].span, SourceSpan { line: 2, col_start: 13, col_end: 19 });
        assert!(errors("modes 1\nloss 0 -0.5")[0].message.contains("outside [0,1]"));
    }

    #[test]
    fn unknown_mnemonic_and_arity() {
        let d = errors("modes 1\ncubic 0 0.1\nsqz 0\nsqz 0 1 2\n");
        assert_eq!(d.len(), 3);
        assert!(d[0].message.contains("unknown statement `cubic`"));
        assert_eq!(d[0].span.line, 2);
        assert!(d[1].message.contains("expects 2 argument"));
        assert_eq!(d[1].span, SourceSpan { line: 3, col_start: 6, col_end: 6 });
        assert_eq!(d[2].span, SourceSpan { line: 4, col_start: 9, col_end: 9 });
    }

    #[test]
    fn semantic_errors_are_spanned() {
        let d = errors("modes 2\n\n  sqz 5 0.1 # bad mode\ncdisp q 0 2*never");
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].span, SourceSpan { line: 3, col_start: 3, col_end: 11 });
        assert!(d[0].message.contains("mode index 5"));
        assert!(d[1].message.contains("read-before-write"));
        assert_eq!(d[1].span.line, 4);
    }

    #[test]
    fn modes_statement_rules() {
        assert!(errors("sqz 0 1")[0].message.contains("must come first"));
        assert!(errors("# only a comment\n")[0].message.contains("missing"));
        assert!(errors("modes 1\nmodes 2")[0].message.contains("duplicate"));
        assert!(errors("modes 0")[0].message.contains("at least 1"));
        assert!(errors("modes -1")[0].message.contains("mode index"));
    }

    #[test]
    fn numbers_and_expressions() {
        assert!(errors("modes 1\nsqz 0 inf")[0].message.contains("finite"));
        assert!(errors("modes 1\nsqz 0 abc")[0].message.contains("expected a number"));
        let p = parse("modes 2\nmeasure p 0 -> a\nmeasure q 1 -> b_2\ncgate disp 1 -a+2.5e-1*b_2-1 .5*a").unwrap();
        let Instruction::Gate { params, .. } = &p.circuit.instructions()[2] else { panic!() };
        assert_eq!(
            params[0],
            Param::Expr(AffineExpr { terms: vec![(-1.0, "a".into()), (0.25, "b_2".into())], offset: -1.0 })
        );
        assert_eq!(params[1], Param::scaled(0.5, "a"));
        for bad in ["2*", "a+", "+*a", "1e", "a b", "2**a", "3a"] {
            let src = format!("modes 1\nmeasure q 0 -> a\ncdisp q 0 {bad}");
            assert!(parse(&src).is_err(), "{bad}");
        }
        assert!(errors("modes 1\ncgate fourier 0 1")[0].message.contains("no parameters"));
        assert!(errors("modes 1\ncgate cubic 0 1")[0].message.contains("unknown gate"));
    }

    #[test]
    fn invalid_utf8_is_located() {
        let d = parse_bytes(b"modes 1\nsqz 0 \xff").unwrap_err();
        assert_eq!(d[0].span, SourceSpan { line: 2, col_start: 7, col_end: 7 });
        assert!(parse_bytes(b"modes 1\n").is_ok());
    }

    #[test]
    fn warnings_for_no_ops() {
        let p = parse("modes 2\nsqz 0 0\nbs 0 1 0.0\nloss 1 1\nsqz 0 0.1").unwrap();
        assert_eq!(p.warnings.len(), 3);
        assert!(p.warnings.iter().all(|w| w.severity == Severity::Warning));
        assert_eq!(p.warnings[0].to_string(), "2:1-7: warning: squeezing by 0 is a no-op");
    }

    #[test]
    fn round_trips_library_circuits() {
        let mut all = feed_forward_corpus();
        all.push(teleportation_circuit(0.1, (1e-17, -3.0e20)));
        for c in all {
            let text = format(&c);
            let back = parse(&text).unwrap_or_else(|d| panic!("{text}\n{d:?}")).circuit;
            assert_eq!(back, c, "{text}");
        }
    }

    #[test]
    fn format_layout() {
        let text = format(&teleportation_circuit(0.5, (1.0, 0.0)));
        assert!(text.starts_with("modes 3\ndisp 0 1.0 0.0\nsqz 1 0.5\n"), "{text}");
        assert!(text.contains("measure q 1 -> mu\n"));
        assert!(text.contains("cdisp q 2 -1.4142135623730951*mu\n"));
    }

    fn arb_param(regs: Vec<String>) -> impl Strategy<Value = Param> {
        let c = prop_oneof![Just(0.0), -1e3f64..1e3, any::<f64>().prop_filter("finite", |v| v.is_finite())];
        if regs.is_empty() {
            return c.prop_map(Param::Const).boxed();
        }
        prop_oneof![
            c.clone().prop_map(Param::Const),
            (proptest::collection::vec((c.clone(), proptest::sample::select(regs)), 1..3), c)
                .prop_map(|(t, o)| Param::affine(t, o)),
        ]
        .boxed()
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (1usize..5, proptest::collection::vec((0u8..8, any::<u32>(), any::<u32>(), -5.0f64..5.0, 0.0f64..=1.0), 0..25))
            .prop_flat_map(|(n, specs)| {
                let mut fixed = Vec::new();
                let mut regs: Vec<String> = Vec::new();
                let mut param_slots = Vec::new();
                for (k, (sel, a, b, x, e)) in specs.into_iter().enumerate() {
                    let m = a as usize % n;
                    let m2 = if n > 1 { (m + 1 + b as usize % (n - 1)) % n } else { m };
                    let ins = match sel {
                        0 if n > 1 => Instruction::gate(GateKind::Sum, &[m, m2], &[]),
                        1 if n > 1 => Instruction::gate(GateKind::Bs, &[m, m2], &[x]),
                        2 => Instruction::gate(GateKind::Fourier, &[m], &[]),
                        3 => Instruction::Loss { mode: m, eta: e },
                        4 => Instruction::Init { mode: m, squeeze: x, displacement: (-x, x * 0.5) },
                        5 => {
                            let reg = format!("r{k}");
                            regs.push(reg.clone());
                            let basis = if b % 2 == 0 { Quadrature::Q } else { Quadrature::P };
                            Instruction::Measure { mode: m, basis, efficiency: e, register: reg }
                        }
                        6 => {
                            param_slots.push((fixed.len(), GateKind::Disp, m, regs.clone()));
                            Instruction::gate(GateKind::Disp, &[m], &[0.0, 0.0])
                        }
                        _ => {
                            let kind = [GateKind::Sqz, GateKind::Phase][b as usize % 2];
                            param_slots.push((fixed.len(), kind, m, regs.clone()));
                            Instruction::gate(kind, &[m], &[x])
                        }
                    };
                    fixed.push(ins);
                }
                let strategies: Vec<_> = param_slots
                    .into_iter()
                    .map(|(idx, kind, m, regs)| {
                        proptest::collection::vec(arb_param(regs), kind.param_count()).prop_map(move |params| {
                            (idx, Instruction::Gate { kind, modes: vec![m], params })
                        })
                    })
                    .collect();
                (Just(n), Just(fixed), strategies)
            })
            .prop_map(|(n, mut fixed, replacements)| {
                for (idx, ins) in replacements {
                    fixed[idx] = ins;
                }
                Circuit::from_instructions(n, fixed)
            })
    }

    proptest! {
        #[test]
        fn parse_format_round_trip(c in arb_circuit()) {
            let text = format(&c);
            let parsed = parse(&text);
            prop_assert!(parsed.is_ok(), "{}\n{:?}", text, parsed);
            prop_assert_eq!(parsed.unwrap().circuit, c);
        }

        #[test]
        fn parser_is_total_on_arbitrary_text(s in ".*") {
            let _ = parse(&s);
        }

        #[test]
        fn parser_is_total_on_arbitrary_bytes(b in proptest::collection::vec(any::<u8>(), 0..200)) {
            if let Err(d) = parse_bytes(&b) {
                prop_assert!(!d.is_empty());
            }
        }

        #[test]
        fn parser_is_total_on_statement_soup(
            lines in proptest::collection::vec(
                proptest::collection::vec(
                    prop_oneof![
                        Just("modes".to_string()), Just("sqz".to_string()), Just("measure".to_string()),
                        Just("cgate".to_string()), Just("cdisp".to_string()), Just("->".to_string()),
                        Just("q".to_string()), Just("0".to_string()), Just("1".to_string()),
                        Just("eta=0.5".to_string()), Just("sum".to_string()), Just("bs".to_string()),
                        "[-+*a-z0-9.=#]{0,8}",
                    ],
                    0..7,
                ),
                0..8,
            )
        ) {
            let text = lines.iter().map(|l| l.join(" ")).collect::<Vec<_>>().join("\n");
            let _ = parse(&text);
        }
    }
}
