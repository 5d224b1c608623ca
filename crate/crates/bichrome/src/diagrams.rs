//! Sliced bichrome diagrams and their `.bg` text form.
//!
//! A diagram is a list of slices read bottom to top. Each slice is a row of
//! elementary tokens acting on consecutive strands of the current interface.
//! Blue strands carry a module label and an orientation, red strands carry
//! only an orientation.
//!
//! ```text
//! # positive-framed red unknot
//! red:cup(+)
//! tw+ red:id(-)
//! cap
//! ```

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Blue,
}

/// A strand end on an interface. Red points have an empty label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub color: Color,
    pub label: String,
    pub positive: bool,
}

impl Point {
    pub fn blue(label: &str, positive: bool) -> Point {
        Point { color: Color::Blue, label: label.to_string(), positive }
    }

    pub fn red(positive: bool) -> Point {
        Point { color: Color::Red, label: String::new(), positive }
    }

    pub fn opposite(&self) -> Point {
        Point { positive: !self.positive, ..self.clone() }
    }

    fn sign(&self) -> char {
        if self.positive {
            '+'
        } else {
            '-'
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.color {
            Color::Red => write!(f, "red{}", self.sign()),
            Color::Blue => write!(f, "{}{}", self.label, self.sign()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Id(Point),
    /// Creates (p, p̄).
    Cup(Point),
    Cap,
    /// `x+` is the braiding, `x-` its inverse.
    Cross(bool),
    /// `tw+` is θ, `tw-` is θ⁻¹.
    Twist(bool),
    Coupon(String),
}

impl Token {
    fn fmt_point(kind: &str, p: &Point) -> String {
        match p.color {
            Color::Red => format!("red:{kind}({})", p.sign()),
            Color::Blue => format!("{kind}({}{})", p.label, p.sign()),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Id(p) => write!(f, "{}", Token::fmt_point("id", p)),
            Token::Cup(p) => write!(f, "{}", Token::fmt_point("cup", p)),
            Token::Cap => write!(f, "cap"),
            Token::Cross(true) => write!(f, "x+"),
            Token::Cross(false) => write!(f, "x-"),
            Token::Twist(true) => write!(f, "tw+"),
            Token::Twist(false) => write!(f, "tw-"),
            Token::Coupon(n) => write!(f, "coupon({n})"),
        }
    }
}

/// What a coupon evaluates to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CouponValue {
    /// Coordinates over the hom basis C(src, tgt), as kernel scalar strings.
    Basis(Vec<String>),
    /// An explicit rows × cols matrix (row-major scalar strings).
    Matrix { rows: usize, cols: usize, entries: Vec<String> },
    /// Named morphism supplied by the backend: id, zero, eta1eps1, pi1, iota1,
    /// cointegral (the lift of the coend integral used by red_to_blue).
    Special(String),
    /// The reflection of another coupon; it has no value until rebound.
    Mirror(Box<CouponValue>),
    Unbound,
}

impl fmt::Display for CouponValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouponValue::Basis(c) => write!(f, "basis({})", c.join(", ")),
            CouponValue::Matrix { rows, cols, entries } => write!(f, "matrix({rows}x{cols}: {})", entries.join(", ")),
            CouponValue::Special(s) => write!(f, "{s}"),
            CouponValue::Mirror(v) => write!(f, "mirror({v})"),
            CouponValue::Unbound => write!(f, "unbound"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouponDef {
    pub name: String,
    pub src: Vec<Point>,
    pub tgt: Vec<Point>,
    pub value: CouponValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Diagram {
    pub comments: Vec<String>,
    pub field: Option<u32>,
    /// Declared labels: name = product of labels, e.g. `X = P1*V2`.
    pub reps: Vec<(String, String)>,
    pub coupons: Vec<CouponDef>,
    pub input: Vec<Point>,
    pub slices: Vec<Vec<Token>>,
}

/// A maximal strand segment between coupons (or a closed loop).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub color: Color,
    pub label: String,
    /// (interface level, position, orientation) of every interface point on the edge.
    pub points: Vec<(usize, usize, bool)>,
}

/// Names the backend resolves without a declaration.
pub fn is_builtin_label(s: &str) -> bool {
    let digits = |t: &str| !t.is_empty() && t.chars().all(|c| c.is_ascii_digit());
    matches!(s, "G" | "H" | "L" | "1")
        || s.strip_prefix('V').is_some_and(digits)
        || s.strip_prefix('P').is_some_and(digits)
        || s.strip_prefix("P(V").and_then(|t| t.strip_suffix(')')).is_some_and(digits)
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

fn is_label_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '(' | ')' | '\'')
}

fn parse_signed_label(s: &str, line: usize, col: usize) -> Result<Point> {
    let (body, sign) = match s.chars().last() {
        Some('+') => (&s[..s.len() - 1], true),
        Some('-') => (&s[..s.len() - 1], false),
        _ => return Err(syntax(line, col, format!("expected a sign after label in {s:?}"))),
    };
    if body.is_empty() || !body.chars().all(is_label_char) {
        return Err(syntax(line, col, format!("bad label {body:?}")));
    }
    if body == "red" {
        return Ok(Point::red(sign));
    }
    Ok(Point::blue(body, sign))
}

fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out
}

fn parse_value(s: &str, line: usize, col: usize) -> Result<CouponValue> {
    let s = s.trim();
    let inner = |prefix: &str| s.strip_prefix(prefix).and_then(|t| t.strip_suffix(')'));
    if let Some(args) = inner("basis(") {
        let items: Vec<String> = split_top_level(args, ',').into_iter().map(|t| t.trim().to_string()).collect();
        if items.iter().any(String::is_empty) {
            return Err(syntax(line, col, "empty coefficient in basis(...)"));
        }
        return Ok(CouponValue::Basis(items));
    }
    if let Some(args) = inner("matrix(") {
        let (shape, rest) = args.split_once(':').ok_or_else(|| syntax(line, col, "matrix needs RxC: entries"))?;
        let (r, c) = shape.trim().split_once('x').ok_or_else(|| syntax(line, col, "matrix shape must be RxC"))?;
        let rows: usize = r.trim().parse().map_err(|_| syntax(line, col, "bad row count"))?;
        let cols: usize = c.trim().parse().map_err(|_| syntax(line, col, "bad column count"))?;
        let entries: Vec<String> = if rest.trim().is_empty() {
            vec![]
        } else {
            split_top_level(rest, ',').into_iter().map(|t| t.trim().to_string()).collect()
        };
        if entries.len() != rows * cols {
            return Err(syntax(line, col, format!("matrix has {} entries, expected {}", entries.len(), rows * cols)));
        }
        return Ok(CouponValue::Matrix { rows, cols, entries });
    }
    if let Some(args) = inner("mirror(") {
        return Ok(CouponValue::Mirror(Box::new(parse_value(args, line, col)?)));
    }
    match s {
        "unbound" => Ok(CouponValue::Unbound),
        "id" | "zero" | "eta1eps1" | "pi1" | "iota1" | "cointegral" => Ok(CouponValue::Special(s.to_string())),
        _ => Err(syntax(line, col, format!("unknown coupon value {s:?}"))),
    }
}

fn parse_points(s: &str, line: usize, col: usize) -> Result<Vec<Point>> {
    let s = s.trim();
    if s == "1" || s.is_empty() {
        return Ok(vec![]);
    }
    s.split_whitespace().map(|t| parse_signed_label(t, line, col)).collect()
}

fn fmt_points(ps: &[Point]) -> String {
    if ps.is_empty() {
        "1".into()
    } else {
        ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }
}

fn parse_token(t: &str, line: usize, col: usize) -> Result<Token> {
    let (red, body) = match t.strip_prefix("red:") {
        Some(b) => (true, b),
        None => (false, t),
    };
    let arg = |kind: &str| body.strip_prefix(kind).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')'));
    let point = |a: &str| -> Result<Point> {
        if red {
            match a {
                "+" => Ok(Point::red(true)),
                "-" => Ok(Point::red(false)),
                _ => Err(syntax(line, col, format!("red strand takes only an orientation, got {a:?}"))),
            }
        } else {
            parse_signed_label(a, line, col)
        }
    };
    if let Some(a) = arg("id") {
        return Ok(Token::Id(point(a)?));
    }
    if let Some(a) = arg("cup") {
        return Ok(Token::Cup(point(a)?));
    }
    if let Some(a) = arg("coupon") {
        if red {
            return Err(syntax(line, col, "coupons are blue"));
        }
        if a.is_empty() || !a.chars().all(|c| is_label_char(c) || c == '~') {
            return Err(syntax(line, col, format!("bad coupon name {a:?}")));
        }
        return Ok(Token::Coupon(a.to_string()));
    }
    let simple = match body {
        "cap" => Some(Token::Cap),
        "x+" => Some(Token::Cross(true)),
        "x-" => Some(Token::Cross(false)),
        "tw+" => Some(Token::Twist(true)),
        "tw-" => Some(Token::Twist(false)),
        _ => None,
    };
    if let Some(tok) = simple {
        if red {
            return Err(syntax(line, col, format!("{body} reads its colors from the interface; drop the red: prefix")));
        }
        return Ok(tok);
    }
    // tw±(X) is accepted; the label is read from the interface
    if let Some(r) = body.strip_prefix("tw+(").or_else(|| body.strip_prefix("tw-(")) {
        if r.ends_with(')') {
            return Ok(Token::Twist(body.starts_with("tw+")));
        }
    }
    Err(syntax(line, col, format!("unknown token {t:?}")))
}

impl Diagram {
    pub fn parse(text: &str) -> Result<Diagram> {
        let mut d = Diagram::default();
        let mut in_header = true;
        let mut seen_in = false;
        let mut declared: Vec<String> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let col0 = raw.len() - raw.trim_start().len() + 1;
            if let Some(c) = trimmed.strip_prefix('#') {
                if in_header && d.field.is_none() && d.reps.is_empty() && d.coupons.is_empty() && !seen_in {
                    d.comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                }
                continue;
            }
            if in_header {
                if let Some(n) = trimmed.strip_prefix("field ") {
                    let n: u32 = n.trim().parse().map_err(|_| syntax(line, col0 + 6, "field order must be a positive integer"))?;
                    if n == 0 {
                        return Err(syntax(line, col0 + 6, "field order must be positive"));
                    }
                    d.field = Some(n);
                    continue;
                }
                if let Some(rest) = trimmed.strip_prefix("rep ") {
                    let (name, expr) = rest.split_once('=').ok_or_else(|| syntax(line, col0, "expected rep NAME = EXPR"))?;
                    let name = name.trim();
                    if name.is_empty() || !name.chars().all(is_label_char) || is_builtin_label(name) {
                        return Err(syntax(line, col0 + 4, format!("bad rep name {name:?}")));
                    }
                    let expr = expr.trim();
                    for factor in expr.split('*') {
                        let factor = factor.trim();
                        if !is_builtin_label(factor) && !declared.iter().any(|n| n == factor) {
                            return Err(Error::UnknownLabel(factor.to_string()));
                        }
                    }
                    declared.push(name.to_string());
                    d.reps.push((name.to_string(), expr.split('*').map(str::trim).collect::<Vec<_>>().join("*")));
                    continue;
                }
                if let Some(rest) = trimmed.strip_prefix("coupon ") {
                    let (name, rest) = rest.split_once(':').ok_or_else(|| syntax(line, col0, "expected coupon NAME : SRC -> TGT = VALUE"))?;
                    let (sig, value) = rest.split_once('=').ok_or_else(|| syntax(line, col0, "coupon needs = VALUE"))?;
                    let (src, tgt) = sig.split_once("->").ok_or_else(|| syntax(line, col0, "coupon needs SRC -> TGT"))?;
                    let name = name.trim();
                    if name.is_empty() || !name.chars().all(|c| is_label_char(c) || c == '~') {
                        return Err(syntax(line, col0 + 7, format!("bad coupon name {name:?}")));
                    }
                    if d.coupons.iter().any(|c| c.name == name) {
                        return Err(syntax(line, col0 + 7, format!("coupon {name} defined twice")));
                    }
                    let def = CouponDef {
                        name: name.to_string(),
                        src: parse_points(src, line, col0)?,
                        tgt: parse_points(tgt, line, col0)?,
                        value: parse_value(value, line, col0)?,
                    };
                    d.coupons.push(def);
                    continue;
                }
                if let Some(rest) = trimmed.strip_prefix("in:") {
                    d.input = parse_points(rest, line, col0 + 3)?;
                    seen_in = true;
                    continue;
                }
                in_header = false;
            }
            let mut slice = Vec::new();
            let mut col = 1;
            for piece in raw.split(' ') {
                if !piece.is_empty() {
                    slice.push(parse_token(piece, line, col)?);
                }
                col += piece.len() + 1;
            }
            d.slices.push(slice);
        }
        // every label must resolve
        for p in d.all_points() {
            if p.color == Color::Blue && !is_builtin_label(&p.label) && !declared.iter().any(|n| *n == p.label) {
                return Err(Error::UnknownLabel(p.label.clone()));
            }
        }
        for s in &d.slices {
            for t in s {
                if let Token::Coupon(n) = t {
                    if !d.coupons.iter().any(|c| &c.name == n) {
                        return Err(Error::UnknownLabel(n.clone()));
                    }
                }
            }
        }
        d.interfaces()?;
        Ok(d)
    }

    fn all_points(&self) -> Vec<&Point> {
        let mut v: Vec<&Point> = self.input.iter().collect();
        for c in &self.coupons {
            v.extend(c.src.iter().chain(&c.tgt));
        }
        for s in &self.slices {
            for t in s {
                if let Token::Id(p) | Token::Cup(p) = t {
                    v.push(p);
                }
            }
        }
        v
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            if c.is_empty() {
                out.push_str("#\n");
            } else {
                out.push_str(&format!("# {c}\n"));
            }
        }
        if let Some(n) = self.field {
            out.push_str(&format!("field {n}\n"));
        }
        for (n, e) in &self.reps {
            out.push_str(&format!("rep {n} = {e}\n"));
        }
        for c in &self.coupons {
            out.push_str(&format!("coupon {} : {} -> {} = {}\n", c.name, fmt_points(&c.src), fmt_points(&c.tgt), c.value));
        }
        if !self.input.is_empty() {
            out.push_str(&format!("in: {}\n", fmt_points(&self.input)));
        }
        for s in &self.slices {
            out.push_str(&s.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
        out
    }

    pub fn coupon(&self, name: &str) -> Option<&CouponDef> {
        self.coupons.iter().find(|c| c.name == name)
    }

    /// Bind (or rebind) a coupon value.
    pub fn bind(&mut self, name: &str, value: CouponValue) -> Result<()> {
        let c = self.coupons.iter_mut().find(|c| c.name == name).ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
        c.value = value;
        Ok(())
    }

    /// Inputs and outputs of a token given the legs it consumes.
    fn token_io(&self, tok: &Token, iface: &[Point], pos: usize, slice: usize) -> Result<(usize, Vec<Point>)> {
        let mismatch = |msg: String| Error::InterfaceMismatch { slice, msg };
        let take = |k: usize| -> Result<&[Point]> {
            iface.get(pos..pos + k).ok_or_else(|| mismatch(format!("token needs {k} strands at position {pos}, interface has {}", iface.len())))
        };
        match tok {
            Token::Id(p) => {
                let a = take(1)?;
                if a[0] != *p {
                    return Err(mismatch(format!("id({p}) applied to {}", a[0])));
                }
                Ok((1, vec![p.clone()]))
            }
            Token::Cup(p) => Ok((0, vec![p.clone(), p.opposite()])),
            Token::Cap => {
                let a = take(2)?;
                if a[1] != a[0].opposite() {
                    return Err(mismatch(format!("cap joins {} and {}", a[0], a[1])));
                }
                Ok((2, vec![]))
            }
            Token::Cross(_) => {
                let a = take(2)?;
                Ok((2, vec![a[1].clone(), a[0].clone()]))
            }
            Token::Twist(_) => {
                let a = take(1)?;
                Ok((1, vec![a[0].clone()]))
            }
            Token::Coupon(n) => {
                let def = self.coupon(n).ok_or_else(|| Error::UnknownLabel(n.clone()))?;
                let a = take(def.src.len())?;
                if a != def.src.as_slice() {
                    return Err(mismatch(format!(
                        "coupon {n} expects {} but gets {}",
                        fmt_points(&def.src),
                        fmt_points(a)
                    )));
                }
                Ok((def.src.len(), def.tgt.clone()))
            }
        }
    }

    /// Interfaces before each slice and after the last one.
    pub fn interfaces(&self) -> Result<Vec<Vec<Point>>> {
        let mut out = vec![self.input.clone()];
        for (s, slice) in self.slices.iter().enumerate() {
            let cur = out.last().unwrap();
            let mut next = Vec::new();
            let mut pos = 0;
            for tok in slice {
                let (k, outs) = self.token_io(tok, cur, pos, s)?;
                pos += k;
                next.extend(outs);
            }
            if pos != cur.len() {
                return Err(Error::InterfaceMismatch { slice: s, msg: format!("slice consumes {pos} of {} strands", cur.len()) });
            }
            out.push(next);
        }
        Ok(out)
    }

    pub fn output(&self) -> Result<Vec<Point>> {
        Ok(self.interfaces()?.pop().unwrap())
    }

    pub fn is_closed(&self) -> Result<bool> {
        Ok(self.input.is_empty() && self.output()?.is_empty())
    }

    /// Union-find over interface points, joined through every non-coupon token.
    fn strand_classes(&self) -> Result<(Vec<Vec<Point>>, Vec<Vec<usize>>, Vec<(usize, usize, usize)>)> {
        let ifs = self.interfaces()?;
        let mut offset = Vec::with_capacity(ifs.len());
        let mut n = 0;
        for i in &ifs {
            offset.push(n);
            n += i.len();
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra] = rb;
            }
        };
        // cups: (slice, token index, node of the first output)
        let mut cups = Vec::new();
        for (s, slice) in self.slices.iter().enumerate() {
            let (mut ip, mut op) = (0, 0);
            for (ti, tok) in slice.iter().enumerate() {
                let i0 = offset[s] + ip;
                let o0 = offset[s + 1] + op;
                match tok {
                    Token::Id(_) | Token::Twist(_) => {
                        union(&mut parent, i0, o0);
                        ip += 1;
                        op += 1;
                    }
                    Token::Cup(_) => {
                        union(&mut parent, o0, o0 + 1);
                        cups.push((s, ti, o0));
                        op += 2;
                    }
                    Token::Cap => {
                        union(&mut parent, i0, i0 + 1);
                        ip += 2;
                    }
                    Token::Cross(_) => {
                        union(&mut parent, i0, o0 + 1);
                        union(&mut parent, i0 + 1, o0);
                        ip += 2;
                        op += 2;
                    }
                    Token::Coupon(nm) => {
                        let def = self.coupon(nm).unwrap();
                        ip += def.src.len();
                        op += def.tgt.len();
                    }
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
        // group nodes by class in order of first appearance
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (x, r) in roots.iter().enumerate() {
            let k = *order.entry(*r).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[k].push(x);
        }
        let cup_nodes = cups.into_iter().map(|(s, ti, o)| (s, ti, order[&roots[o]])).collect();
        let _ = offset;
        Ok((ifs, classes, cup_nodes))
    }

    fn node_position(ifs: &[Vec<Point>], mut x: usize) -> (usize, usize) {
        for (l, i) in ifs.iter().enumerate() {
            if x < i.len() {
                return (l, x);
            }
            x -= i.len();
        }
        unreachable!("node index in range")
    }

    /// Blue edges and red components, in order of first appearance.
    pub fn edges(&self) -> Result<Vec<Edge>> {
        let (ifs, classes, _) = self.strand_classes()?;
        let mut out = Vec::new();
        for nodes in classes {
            let pts: Vec<(usize, usize, bool)> = nodes
                .iter()
                .map(|&x| {
                    let (l, p) = Diagram::node_position(&ifs, x);
                    (l, p, ifs[l][p].positive)
                })
                .collect();
            let (l, p, _) = pts[0];
            let first = &ifs[l][p];
            out.push(Edge { id: out.len(), color: first.color, label: first.label.clone(), points: pts });
        }
        Ok(out)
    }

    /// Red components as lists of cups (slice, token index), first cup first.
    /// Errors if a red component reaches the boundary.
    pub fn red_components(&self) -> Result<Vec<Vec<(usize, usize)>>> {
        let (ifs, classes, cups) = self.strand_classes()?;
        let last = ifs.len() - 1;
        let mut comps: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
        for (k, nodes) in classes.iter().enumerate() {
            let (l, p) = Diagram::node_position(&ifs, nodes[0]);
            if ifs[l][p].color != Color::Red {
                continue;
            }
            if nodes.iter().any(|&x| {
                let (l, _) = Diagram::node_position(&ifs, x);
                l == 0 || l == last
            }) {
                return Err(Error::OpenRedComponent);
            }
            let cs: Vec<(usize, usize)> = cups.iter().filter(|c| c.2 == k).map(|c| (c.0, c.1)).collect();
            comps.push((k, cs));
        }
        Ok(comps.into_iter().map(|(_, c)| c).collect())
    }

    /// Linking matrix of the red components in the order of `red_components`.
    /// Off the diagonal: half the signed count of crossings between two
    /// components; on it: writhe plus twists. A crossing x± of strands with
    /// orientations a, b has sign ±ab.
    pub fn red_linking_matrix(&self) -> Result<Vec<Vec<i64>>> {
        self.red_components()?;
        let (ifs, classes, _) = self.strand_classes()?;
        let mut offset = Vec::with_capacity(ifs.len());
        let mut n = 0;
        for i in &ifs {
            offset.push(n);
            n += i.len();
        }
        let mut comp_of = vec![usize::MAX; n];
        let mut k = 0;
        for nodes in &classes {
            let (l, p) = Diagram::node_position(&ifs, nodes[0]);
            if ifs[l][p].color == Color::Red {
                for &x in nodes {
                    comp_of[x] = k;
                }
                k += 1;
            }
        }
        let mut m = vec![vec![0i64; k]; k];
        let sgn = |b: bool| if b { 1i64 } else { -1 };
        for (s, slice) in self.slices.iter().enumerate() {
            let mut ip = 0;
            for tok in slice {
                let node = offset[s] + ip;
                match tok {
                    Token::Id(_) => ip += 1,
                    Token::Twist(pos) => {
                        if ifs[s][ip].color == Color::Red {
                            let c = comp_of[node];
                            m[c][c] += sgn(*pos);
                        }
                        ip += 1;
                    }
                    Token::Cup(_) => {}
                    Token::Cap => ip += 2,
                    Token::Cross(pos) => {
                        let (a, b) = (&ifs[s][ip], &ifs[s][ip + 1]);
                        if a.color == Color::Red && b.color == Color::Red {
                            let e = sgn(*pos) * sgn(a.positive) * sgn(b.positive);
                            let (ca, cb) = (comp_of[node], comp_of[node + 1]);
                            if ca == cb {
                                m[ca][ca] += e;
                            } else {
                                m[ca][cb] += e;
                                m[cb][ca] += e;
                            }
                        }
                        ip += 2;
                    }
                    Token::Coupon(nm) => ip += self.coupon(nm).map_or(0, |c| c.src.len()),
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    if m[i][j] % 2 != 0 {
                        return Err(Error::NotALink(format!("odd crossing count between components {i} and {j}")));
                    }
                    m[i][j] /= 2;
                }
            }
        }
        Ok(m)
    }

    /// Stack `other` on top of `self`.
    pub fn compose(&self, other: &Diagram) -> Result<Diagram> {
        let out = self.output()?;
        if out != other.input {
            return Err(Error::InterfaceMismatch {
                slice: self.slices.len(),
                msg: format!("output {} does not match input {}", fmt_points(&out), fmt_points(&other.input)),
            });
        }
        let mut d = self.clone();
        d.merge_header(other)?;
        d.slices.extend(other.slices.iter().cloned());
        Ok(d)
    }

    fn merge_header(&mut self, other: &Diagram) -> Result<()> {
        if let (Some(a), Some(b)) = (self.field, other.field) {
            if a != b {
                return Err(Error::Parse(format!("field orders {a} and {b} differ")));
            }
        }
        self.field = self.field.or(other.field);
        for r in &other.reps {
            match self.reps.iter().find(|x| x.0 == r.0) {
                Some(x) if x != r => return Err(Error::Parse(format!("label {} declared twice", r.0))),
                Some(_) => {}
                None => self.reps.push(r.clone()),
            }
        }
        for c in &other.coupons {
            match self.coupon(&c.name) {
                Some(x) if x != c => return Err(Error::Parse(format!("coupon {} defined twice", c.name))),
                Some(_) => {}
                None => self.coupons.push(c.clone()),
            }
        }
        Ok(())
    }

    /// Side by side, `self` on the left.
    pub fn tensor(&self, other: &Diagram) -> Result<Diagram> {
        let ia = self.interfaces()?;
        let ib = other.interfaces()?;
        let mut d = self.clone();
        d.merge_header(other)?;
        d.input = self.input.iter().chain(&other.input).cloned().collect();
        let n = self.slices.len().max(other.slices.len());
        let ids = |iface: &[Point]| iface.iter().map(|p| Token::Id(p.clone())).collect::<Vec<_>>();
        d.slices = (0..n)
            .map(|s| {
                let mut row = match self.slices.get(s) {
                    Some(x) => x.clone(),
                    None => ids(ia.last().unwrap()),
                };
                row.extend(match other.slices.get(s) {
                    Some(x) => x.clone(),
                    None => ids(ib.last().unwrap()),
                });
                row
            })
            .filter(|row| !row.is_empty())
            .collect();
        Ok(d)
    }

    /// Closure of a diagram with one input and the same output: cup, T ⊗ id, cap.
    pub fn trace_closure(&self) -> Result<Diagram> {
        let out = self.output()?;
        if self.input.len() != 1 || out != self.input {
            return Err(Error::InterfaceMismatch { slice: 0, msg: "trace closure needs matching single in/out".into() });
        }
        let v = self.input[0].clone();
        let mut d = self.clone();
        d.input.clear();
        let mut slices = vec![vec![Token::Cup(v.clone())]];
        for s in &self.slices {
            let mut row = s.clone();
            row.push(Token::Id(v.opposite()));
            slices.push(row);
        }
        slices.push(vec![Token::Cap]);
        d.slices = slices;
        Ok(d)
    }

    /// Mirror top to bottom with orientations reversed: cups and caps swap,
    /// crossings and twists change sign, coupon f becomes f~ (unbound until rebound).
    pub fn reflect(&self) -> Result<Diagram> {
        let ifs = self.interfaces()?;
        let mut d = self.clone();
        d.input = ifs.last().unwrap().clone();
        d.slices = self
            .slices
            .iter()
            .enumerate()
            .rev()
            .map(|(s, slice)| {
                let iface = &ifs[s];
                let mut pos = 0;
                slice
                    .iter()
                    .map(|t| {
                        let r = match t {
                            Token::Id(p) => {
                                pos += 1;
                                Token::Id(p.clone())
                            }
                            Token::Cup(_) => Token::Cap,
                            Token::Cap => {
                                let p = iface[pos].clone();
                                pos += 2;
                                Token::Cup(p)
                            }
                            Token::Cross(b) => {
                                pos += 2;
                                Token::Cross(!b)
                            }
                            Token::Twist(b) => {
                                pos += 1;
                                Token::Twist(!b)
                            }
                            Token::Coupon(n) => {
                                pos += self.coupon(n).unwrap().src.len();
                                Token::Coupon(mirror_name(n))
                            }
                        };
                        r
                    })
                    .collect()
            })
            .collect();
        d.coupons = self
            .coupons
            .iter()
            .map(|c| CouponDef {
                name: mirror_name(&c.name),
                src: c.tgt.clone(),
                tgt: c.src.clone(),
                value: match &c.value {
                    CouponValue::Mirror(v) => (**v).clone(),
                    v => CouponValue::Mirror(Box::new(v.clone())),
                },
            })
            .collect();
        Ok(d)
    }

    /// Closed diagram is admissible iff some blue edge carries a projective label.
    pub fn is_admissible(&self, is_projective: &dyn Fn(&str) -> bool) -> Result<bool> {
        if !self.is_closed()? {
            return Err(Error::NotClosed);
        }
        Ok(self.edges()?.iter().any(|e| e.color == Color::Blue && is_projective(&e.label)))
    }

    /// Open the closed diagram along a blue projective edge into a (1,1) diagram
    /// whose trace closure is isotopic to the original.
    pub fn cutting_presentation(&self, edge: usize, is_projective: &dyn Fn(&str) -> bool) -> Result<Diagram> {
        if !self.is_closed()? {
            return Err(Error::NotClosed);
        }
        let edges = self.edges()?;
        let e = edges.get(edge).ok_or_else(|| Error::Usage(format!("no edge {edge}")))?;
        if e.color != Color::Blue {
            return Err(Error::EdgeNotBlue(edge));
        }
        if !is_projective(&e.label) {
            return Err(Error::EdgeNotProjective(edge));
        }
        let &(level, pos, _) = e.points.iter().find(|p| p.2).or_else(|| e.points.first()).expect("edge has points");
        Ok(self.cut_at(level, pos))
    }

    /// Cut the strand at interface `level`, position `pos`.
    pub fn cut_at(&self, level: usize, pos: usize) -> Diagram {
        let ifs = self.interfaces().expect("validated");
        let iface = &ifs[level];
        let v = iface[pos].clone();
        let left = &iface[..pos];
        let right = &iface[pos + 1..];
        let (m, r) = (left.len(), right.len());
        let ids = |ps: &[Point]| ps.iter().map(|p| Token::Id(p.clone())).collect::<Vec<Token>>();
        let mut slices: Vec<Vec<Token>> = Vec::new();
        // interface bookkeeping: partners on the left are opposite(left[j]) in reverse order
        let lpart = |from: usize| -> Vec<Point> { (from..m).rev().map(|j| left[j].opposite()).collect() };
        let rpart = |upto: usize| -> Vec<Point> { (0..upto).rev().map(|j| right[j].opposite()).collect() };
        // left cups, outermost first
        for j in (0..m).rev() {
            let mut row = ids(&lpart(j + 1));
            row.push(Token::Cup(left[j].opposite()));
            row.extend(ids(&left[j + 1..]));
            row.push(Token::Id(v.clone()));
            slices.push(row);
        }
        // right cups, outermost first
        for j in 0..r {
            let mut row = ids(&lpart(0));
            row.extend(ids(left));
            row.push(Token::Id(v.clone()));
            row.extend(ids(&right[..j]));
            row.push(Token::Cup(right[j].clone()));
            row.extend(ids(&rpart(j)));
            slices.push(row);
        }
        // upper part, then lower part, between the partners
        let lp = ids(&lpart(0));
        let rp = ids(&rpart(r));
        for s in self.slices[level..].iter().chain(&self.slices[..level]) {
            let mut row = lp.clone();
            row.extend(s.iter().cloned());
            row.extend(rp.iter().cloned());
            slices.push(row);
        }
        // left caps, innermost first
        for j in 0..m {
            let mut row = ids(&lpart(j + 1));
            row.push(Token::Cap);
            row.extend(ids(&left[j + 1..]));
            row.push(Token::Id(v.clone()));
            row.extend(ids(right));
            row.extend(ids(&rpart(r)));
            slices.push(row);
        }
        // right caps, innermost first
        for j in (0..r).rev() {
            let mut row = vec![Token::Id(v.clone())];
            row.extend(ids(&right[..j]));
            row.push(Token::Cap);
            row.extend(ids(&rpart(j)));
            slices.push(row);
        }
        let mut d = self.clone();
        d.input = vec![v];
        d.slices = slices.into_iter().filter(|s| !s.is_empty()).collect();
        d
    }

    /// Replace a red component by a blue strand labeled by the regular module H,
    /// with its integral insertion turned into a `cointegral` coupon.
    pub fn red_to_blue(&self, component: usize, is_projective: &dyn Fn(&str) -> bool) -> Result<Diagram> {
        if !self.is_admissible(is_projective)? {
            return Err(Error::NotAdmissible(String::new()));
        }
        let comps = self.red_components()?;
        let cups = comps.get(component).ok_or_else(|| Error::Usage(format!("no red component {component}")))?;
        let (ifs, classes, _) = self.strand_classes()?;
        // class of the component: the class of its first cup's first output
        let mut d = self.clone();
        let (s0, t0) = cups[0];
        let node_of = |level: usize, pos: usize| -> usize { ifs[..level].iter().map(Vec::len).sum::<usize>() + pos };
        let out_pos = |s: usize, t: usize| -> usize {
            let mut op = 0;
            for tok in &self.slices[s][..t] {
                op += match tok {
                    Token::Id(_) | Token::Twist(_) => 1,
                    Token::Cup(_) | Token::Cross(_) => 2,
                    Token::Cap => 0,
                    Token::Coupon(n) => self.coupon(n).unwrap().tgt.len(),
                };
            }
            op
        };
        let root_node = node_of(s0 + 1, out_pos(s0, t0));
        let class = classes.iter().find(|c| c.contains(&root_node)).expect("cup node").clone();
        let in_class = |level: usize, pos: usize| class.contains(&node_of(level, pos));
        let name = {
            let mut k = 0;
            loop {
                let n = format!("lam{k}");
                if self.coupon(&n).is_none() {
                    break n;
                }
                k += 1;
            }
        };
        let h = |p: &Point| Point::blue("H", p.positive);
        for (s, slice) in self.slices.iter().enumerate() {
            let mut ip = 0;
            let mut op = 0;
            for (ti, tok) in slice.iter().enumerate() {
                let new = match tok {
                    Token::Id(p) => {
                        let t = if in_class(s, ip) { Token::Id(h(p)) } else { tok.clone() };
                        ip += 1;
                        op += 1;
                        t
                    }
                    Token::Cup(p) => {
                        let t = if (s, ti) == (s0, t0) {
                            d.coupons.push(CouponDef {
                                name: name.clone(),
                                src: vec![],
                                tgt: vec![h(p), h(&p.opposite())],
                                value: CouponValue::Special("cointegral".into()),
                            });
                            Token::Coupon(name.clone())
                        } else if in_class(s + 1, op) {
                            Token::Cup(h(p))
                        } else {
                            tok.clone()
                        };
                        op += 2;
                        t
                    }
                    Token::Cap => {
                        ip += 2;
                        Token::Cap
                    }
                    Token::Cross(_) => {
                        ip += 2;
                        op += 2;
                        tok.clone()
                    }
                    Token::Twist(_) => {
                        ip += 1;
                        op += 1;
                        tok.clone()
                    }
                    Token::Coupon(n) => {
                        let def = self.coupon(n).unwrap();
                        ip += def.src.len();
                        op += def.tgt.len();
                        tok.clone()
                    }
                };
                d.slices[s][ti] = new;
            }
        }
        d.interfaces()?;
        Ok(d)
    }
}

pub fn mirror_name(n: &str) -> String {
    match n.strip_suffix('~') {
        Some(b) => b.to_string(),
        None => format!("{n}~"),
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const O_PLUS: &str = "# positive unknot\nred:cup(+)\ntw+ red:id(-)\ncap\n";

    #[test]
    fn round_trip() {
        let d = Diagram::parse(O_PLUS).unwrap();
        assert_eq!(d.serialize(), O_PLUS);
        assert!(d.is_closed().unwrap());
        assert_eq!(d.red_components().unwrap(), vec![vec![(0, 0)]]);
    }

    #[test]
    fn mismatch_is_located() {
        let err = Diagram::parse("cup(P1+)\nid(P1+) id(P1+)\n").unwrap_err();
        assert!(matches!(err, Error::InterfaceMismatch { slice: 1, .. }), "{err:?}");
        let err = Diagram::parse("cup(P1+)\n cap(\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, col: 2, .. }), "{err:?}");
        assert!(matches!(Diagram::parse("cup(Q+)\ncap\n").unwrap_err(), Error::UnknownLabel(_)));
    }

    #[test]
    fn reflect_is_involutive() {
        let t = "coupon f : P1+ -> P1+ = basis(1, 2)\nin: P1+\ncoupon(f)\ncup(V2-) id(P1+)\nx+ id(P1+)\nid(V2+) id(V2-) tw+\n";
        let d = Diagram::parse(t).unwrap();
        let r = d.reflect().unwrap();
        assert_eq!(r.reflect().unwrap(), d);
    }

    #[test]
    fn cut_closes_back() {
        let t = "coupon f : P1+ -> P1+ = id\ncup(P1+)\ncoupon(f) id(P1-)\ncap\n";
        let d = Diagram::parse(t).unwrap();
        let edges = d.edges().unwrap();
        // coupon output -> cap -> cup -> coupon input is a single edge
        assert_eq!(edges.len(), 1);
        let cut = d.cutting_presentation(0, &|_| true).unwrap();
        assert_eq!(cut.input, vec![Point::blue("P1", true)]);
        assert_eq!(cut.output().unwrap(), cut.input);
        cut.trace_closure().unwrap().interfaces().unwrap();
    }
}
