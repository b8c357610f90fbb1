//! CPLEX-LP export of the linearized search problems and training problems,
//! plus a reader for the subset of the format written here.
//!
//! Each count `z_i` of detections in scenario `i` is expanded into binaries
//! `w_{i,j}`, `j = 0..=T`, with `sum_j w_{i,j} = 1` and
//! `sum_j j w_{i,j} = z_i`, so `exp(-alpha z_i) = sum_j w_{i,j} exp(-alpha j)`.
//!
//! Variable names are 1-based: `y_c_t`, `w_i_j_k` for a single problem and
//! `y_o_c_t`, `w_o_i_j_k`, `B_c_t_l` (or `Bp`/`Bn`), `b_c_t`, `gamma`, `u_o`
//! for a training problem.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::probspace::RiskSpec;
use crate::search::{ProblemKind, SearchInstance, SearchPath, Weights};
use crate::train::{DecompResult, TrainingConfig};

const TERMS_PER_LINE: usize = 6;

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{:.16e}", v.abs());
    let (mant, exp) = s.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

/// Linear expression accumulated term by term.
#[derive(Debug, Clone, Default)]
struct Expr {
    terms: Vec<(f64, String)>,
}

impl Expr {
    fn add(&mut self, coef: f64, var: impl Into<String>) {
        self.terms.push((coef, var.into()));
    }

    fn render(&self, out: &mut String) {
        if self.terms.is_empty() {
            out.push_str(" 0");
            return;
        }
        for (k, (c, v)) in self.terms.iter().enumerate() {
            if k > 0 && k % TERMS_PER_LINE == 0 {
                out.push_str("\n   ");
            }
            let sign = if c.is_sign_negative() { '-' } else { '+' };
            let _ = write!(out, " {sign} {} {v}", fmt_num(*c));
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Sense {
    Le,
    Ge,
    Eq,
}

struct Writer {
    objective: Expr,
    rows: Vec<(String, Expr, Sense, f64)>,
    free: Vec<String>,
    binary: Vec<String>,
}

impl Writer {
    fn new() -> Self {
        Self { objective: Expr::default(), rows: Vec::new(), free: Vec::new(), binary: Vec::new() }
    }

    fn row(&mut self, name: String, e: Expr, s: Sense, rhs: f64) {
        self.rows.push((name, e, s, rhs));
    }

    fn finish(self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ {title}");
        out.push_str("Minimize\n obj:");
        self.objective.render(&mut out);
        out.push_str("\nSubject To\n");
        for (name, e, s, rhs) in &self.rows {
            let _ = write!(out, " {name}:");
            e.render(&mut out);
            let op = match s {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}{}", if rhs.is_sign_negative() && *rhs != 0.0 { "-" } else { "" }, fmt_num(*rhs));
        }
        if !self.free.is_empty() {
            out.push_str("Bounds\n");
            for v in &self.free {
                let _ = writeln!(out, " {v} free");
            }
        }
        if !self.binary.is_empty() {
            out.push_str("Binary\n");
            for chunk in self.binary.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn exp_row(w: &Weights, horizon: usize) -> Vec<f64> {
    (0..=horizon as u32).map(|j| (-w.alpha * f64::from(j)).exp()).collect()
}

fn target_count(kind: ProblemKind) -> usize {
    match kind {
        ProblemKind::Sp1 => 1,
        ProblemKind::Sp2 => 2,
    }
}

/// Path rows, linkage rows and target rows for one copy of the problem.
/// `pre` prefixes every variable and row name (empty for a single problem).
fn emit_copy(wr: &mut Writer, inst: &SearchInstance, w: &Weights, kind: ProblemKind, pre: &str) -> Expr {
    let cells = inst.grid().cell_count();
    let horizon = inst.horizon();
    let ex = exp_row(w, horizon);
    let y = |c: usize, t: usize| format!("y_{pre}{}_{}", c + 1, t + 1);
    let wv = |i: usize, j: usize, k: usize| format!("w_{pre}{}_{j}_{}", i + 1, k + 1);

    for t in 0..horizon {
        for c in 0..cells {
            wr.binary.push(y(c, t));
        }
    }
    let targets = target_count(kind);
    for k in 0..targets {
        for i in 0..inst.scenario_count() {
            for j in 0..=horizon {
                wr.binary.push(wv(i, j, k));
            }
        }
    }

    let mut objective = Expr::default();
    for (i, q) in w.q.iter().enumerate() {
        for (j, e) in ex.iter().enumerate() {
            objective.add(q * e, wv(i, j, 0));
        }
    }
    if kind == ProblemKind::Sp2 {
        let mut e2 = Expr::default();
        for (i, q) in w.q.iter().enumerate() {
            for (j, e) in ex.iter().enumerate() {
                e2.add(q * e, wv(i, j, 1));
            }
        }
        wr.row(format!("tau_{pre}"), e2, Sense::Le, inst.tau());
    }
    for t in 0..horizon {
        let mut e = Expr::default();
        for c in 0..cells {
            e.add(1.0, y(c, t));
        }
        wr.row(format!("one_{pre}{}", t + 1), e, Sense::Eq, 1.0);
    }
    let grid = inst.grid();
    for t in 1..horizon {
        for c in 0..cells {
            let mut e = Expr::default();
            for n in grid.neighbors(c) {
                e.add(1.0, y(n, t - 1));
            }
            e.add(-1.0, y(c, t));
            wr.row(format!("move_{pre}{}_{}", c + 1, t + 1), e, Sense::Ge, 0.0);
        }
    }
    for k in 0..targets {
        for (i, track) in inst.target_tracks(k).iter().enumerate() {
            let mut link = Expr::default();
            for j in 1..=horizon {
                link.add(j as f64, wv(i, j, k));
            }
            for (t, &c) in track.iter().enumerate() {
                link.add(-1.0, y(c, t));
            }
            wr.row(format!("link_{pre}{}_{}", i + 1, k + 1), link, Sense::Eq, 0.0);
            let mut sum = Expr::default();
            for j in 0..=horizon {
                sum.add(1.0, wv(i, j, k));
            }
            wr.row(format!("pick_{pre}{}_{}", i + 1, k + 1), sum, Sense::Eq, 1.0);
        }
    }
    objective
}

/// The linearized single-instance problem at `xi`.
pub fn emit_milp(inst: &SearchInstance, xi: &[f64], kind: ProblemKind) -> Result<String> {
    inst.check_kind(kind)?;
    let w = inst.weights(xi)?;
    let mut wr = Writer::new();
    wr.objective = emit_copy(&mut wr, inst, &w, kind, "");
    Ok(wr.finish(&format!("{} nondetection, {} cells, {} periods", kind.label(), inst.grid().cell_count(), inst.horizon())))
}

/// The full training problem with big-M margin rows and the risk objective.
pub fn emit_training_milp(
    inst: &SearchInstance,
    training: &[Vec<f64>],
    config: &TrainingConfig,
    kind: ProblemKind,
) -> Result<String> {
    config.validate()?;
    inst.check_kind(kind)?;
    if !config.margin.is_finite() {
        return Err(domain("the training problem needs a finite delta"));
    }
    let space = config.space(training.len())?;
    let beta = match config.risk0 {
        RiskSpec::Quantile { .. } => return Err(domain("the quantile objective has no linear training formulation")),
        RiskSpec::Superquantile { alpha } => Some(alpha),
        _ => None,
    };
    let cells = inst.grid().cell_count();
    let horizon = inst.horizon();
    let r = inst.param_dim();
    let (eps, delta) = (config.margin.epsilon(), config.margin.delta());
    let regularize = config.theta > 0.0;
    let bname = |c: usize, t: usize, l: usize, s: &str| format!("{s}_{}_{}_{}", c + 1, t + 1, l + 1);
    let offname = |c: usize, t: usize| format!("b_{}_{}", c + 1, t + 1);

    let mut wr = Writer::new();
    let mut objective = Expr::default();
    for (o, xi) in training.iter().enumerate() {
        let w = inst.weights(xi)?;
        let pre = format!("{}_", o + 1);
        let nondetect = emit_copy(&mut wr, inst, &w, kind, &pre);
        match config.risk0 {
            RiskSpec::Expectation => {
                let p = space.weights()[o];
                for (c, v) in nondetect.terms {
                    objective.add(p * c, v);
                }
            }
            _ => {
                // nondetection - gamma [- u_o] <= 0
                let mut e = nondetect;
                e.add(-1.0, "gamma");
                if beta.is_some() {
                    e.add(-1.0, format!("u_{}", o + 1));
                }
                wr.row(format!("epi_{}", o + 1), e, Sense::Le, 0.0);
            }
        }
        for t in 0..horizon {
            for c in 0..cells {
                let y = format!("y_{pre}{}_{}", c + 1, t + 1);
                let mut g = Expr::default();
                for (l, x) in xi.iter().enumerate() {
                    if *x == 0.0 {
                        continue;
                    }
                    if regularize {
                        g.add(*x, bname(c, t, l, "Bp"));
                        g.add(-x, bname(c, t, l, "Bn"));
                    } else {
                        g.add(*x, bname(c, t, l, "B"));
                    }
                }
                g.add(1.0, offname(c, t));
                g.add(-(delta + eps), y);
                wr.row(format!("lo_{pre}{}_{}", c + 1, t + 1), g.clone(), Sense::Ge, -delta);
                wr.row(format!("hi_{pre}{}_{}", c + 1, t + 1), g, Sense::Le, -eps);
            }
        }
    }
    match config.risk0 {
        RiskSpec::Expectation => {}
        RiskSpec::WorstCase => {
            objective.add(1.0, "gamma");
            wr.free.push("gamma".into());
        }
        RiskSpec::Superquantile { alpha } => {
            objective.add(1.0, "gamma");
            wr.free.push("gamma".into());
            for (o, p) in space.weights().iter().enumerate() {
                objective.add(p / (1.0 - alpha), format!("u_{}", o + 1));
            }
        }
        RiskSpec::Quantile { .. } => unreachable!(),
    }
    for t in 0..horizon {
        for c in 0..cells {
            for l in 0..r {
                if regularize {
                    objective.add(config.theta, bname(c, t, l, "Bp"));
                    objective.add(config.theta, bname(c, t, l, "Bn"));
                } else {
                    wr.free.push(bname(c, t, l, "B"));
                }
            }
            wr.free.push(offname(c, t));
        }
    }
    wr.objective = objective;
    Ok(wr.finish(&format!(
        "training problem, {} points, {} objective, {}",
        training.len(),
        config.risk0.label(),
        kind.label()
    )))
}

/// `<instance>_<mode>_<hash>.lp`, hashing the bytes of `xi`.
pub fn lp_file_name(instance: &str, kind: ProblemKind, xi: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in xi {
        h.update(v.to_le_bytes());
    }
    let digest = h.finalize();
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{instance}_{}_{hex}.lp", kind.label())
}

/// Variable values of the single problem at a path.
pub fn path_assignment(inst: &SearchInstance, path: &SearchPath, kind: ProblemKind) -> HashMap<String, f64> {
    copy_assignment(inst, path, kind, "")
}

fn copy_assignment(inst: &SearchInstance, path: &SearchPath, kind: ProblemKind, pre: &str) -> HashMap<String, f64> {
    let mut a = HashMap::new();
    let cells = inst.grid().cell_count();
    for t in 0..inst.horizon() {
        for c in 0..cells {
            a.insert(format!("y_{pre}{}_{}", c + 1, t + 1), f64::from(u8::from(path.cells()[t] == c)));
        }
    }
    for k in 0..target_count(kind) {
        for (i, d) in inst.path_counts(path, k).into_iter().enumerate() {
            for j in 0..=inst.horizon() {
                a.insert(format!("w_{pre}{}_{j}_{}", i + 1, k + 1), f64::from(u8::from(j as u32 == d)));
            }
        }
    }
    a
}

/// Variable values of the training problem at a decomposition result.
pub fn decomposition_assignment(
    inst: &SearchInstance,
    decomp: &DecompResult,
    config: &TrainingConfig,
) -> Result<HashMap<String, f64>> {
    let mut a = HashMap::new();
    for (o, path) in decomp.paths.iter().enumerate() {
        a.extend(copy_assignment(inst, path, decomp.kind, &format!("{}_", o + 1)));
    }
    let rule = &decomp.rule;
    let cells = inst.grid().cell_count();
    for i in 0..rule.rows() {
        let (c, t) = (i % cells, i / cells);
        for (l, &v) in rule.row(i).iter().enumerate() {
            let tag = format!("{}_{}_{}", c + 1, t + 1, l + 1);
            if config.theta > 0.0 {
                a.insert(format!("Bp_{tag}"), v.max(0.0));
                a.insert(format!("Bn_{tag}"), (-v).max(0.0));
            } else {
                a.insert(format!("B_{tag}"), v);
            }
        }
        a.insert(format!("b_{}_{}", c + 1, t + 1), rule.offset()[i]);
    }
    let space = config.space(decomp.values.len())?;
    match config.risk0 {
        RiskSpec::WorstCase => {
            a.insert("gamma".into(), space.rv(&decomp.values)?.worst_case());
        }
        RiskSpec::Superquantile { alpha } => {
            let q = space.rv(&decomp.values)?.quantile(alpha)?;
            a.insert("gamma".into(), q);
            for (o, v) in decomp.values.iter().enumerate() {
                a.insert(format!("u_{}", o + 1), (v - q).max(0.0));
            }
        }
        _ => {}
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: RowKind,
    pub rhs: f64,
}

impl LpRow {
    pub fn activity(&self, x: &HashMap<String, f64>) -> f64 {
        self.terms.iter().map(|(v, c)| c * x.get(v).copied().unwrap_or(0.0)).sum()
    }

    pub fn violation(&self, x: &HashMap<String, f64>) -> f64 {
        let a = self.activity(x);
        match self.sense {
            RowKind::Le => (a - self.rhs).max(0.0),
            RowKind::Ge => (self.rhs - a).max(0.0),
            RowKind::Eq => (a - self.rhs).abs(),
        }
    }
}

/// A parsed LP file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<LpRow>,
    /// Lower and upper bound per variable named in the Bounds section.
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binary: Vec<String>,
    pub general: Vec<String>,
}

impl LpModel {
    pub fn variables(&self) -> HashSet<&str> {
        let mut v: HashSet<&str> = self.objective.iter().map(|(n, _)| n.as_str()).collect();
        for r in &self.rows {
            v.extend(r.terms.iter().map(|(n, _)| n.as_str()));
        }
        v.extend(self.bounds.keys().map(String::as_str));
        v.extend(self.binary.iter().map(String::as_str));
        v.extend(self.general.iter().map(String::as_str));
        v
    }

    pub fn objective_value(&self, x: &HashMap<String, f64>) -> f64 {
        self.objective.iter().map(|(v, c)| c * x.get(v).copied().unwrap_or(0.0)).sum()
    }

    /// Largest violation of rows, bounds and integrality at `x`; missing
    /// variables count as zero.
    pub fn max_violation(&self, x: &HashMap<String, f64>) -> f64 {
        let get = |v: &str| x.get(v).copied().unwrap_or(0.0);
        let mut worst = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        for v in self.variables() {
            let (lo, hi) = self.bounds.get(v).copied().unwrap_or((0.0, f64::INFINITY));
            let val = get(v);
            worst = worst.max(lo - val).max(val - hi);
        }
        for v in self.binary.iter().chain(&self.general) {
            let val = get(v);
            worst = worst.max((val - val.round()).abs());
        }
        for v in &self.binary {
            worst = worst.max(get(v) - 1.0);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
    Done,
}

fn section_header(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "general" | "generals" | "gen" => Some(Section::General),
        "end" => Some(Section::Done),
        _ => None,
    }
}

fn parse_num(tok: &str) -> Option<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().ok(),
    }
}

struct Tokens {
    toks: Vec<(usize, String)>,
    pos: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|(_, t)| t.as_str())
    }

    fn next(&mut self) -> Option<(usize, String)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos.min(self.toks.len().saturating_sub(1))).map_or(0, |(l, _)| *l)
    }
}

fn is_op(t: &str) -> bool {
    matches!(t, "<=" | ">=" | "=" | "=<" | "=>" | "<" | ">")
}

/// Reads `[name:] expr` terms until a comparison operator or the end.
fn parse_expr(tk: &mut Tokens, stop_at_op: bool) -> Result<(Option<String>, Vec<(String, f64)>)> {
    let mut name = None;
    if let Some(t) = tk.peek() {
        if let Some(n) = t.strip_suffix(':') {
            name = Some(n.to_string());
            tk.next();
        }
    }
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while let Some(t) = tk.peek() {
        if stop_at_op && is_op(t) {
            break;
        }
        let (line, mut t) = tk.next().expect("peeked");
        // a sign glued to a name, as in "-x"
        if t.len() > 1 && (t.starts_with('-') || t.starts_with('+')) && parse_num(&t).is_none() {
            if t.starts_with('-') {
                sign = -sign;
            }
            t.remove(0);
        }
        match t.as_str() {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Some(v) = parse_num(&t) {
                    if coef.is_some() {
                        return Err(Error::Parse { line, msg: format!("two coefficients in a row near '{t}'") });
                    }
                    coef = Some(v);
                } else {
                    terms.push((t, sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if let Some(c) = coef {
        // a bare constant is only valid as 0 (an empty objective)
        if c != 0.0 {
            return Err(Error::Parse { line: tk.line(), msg: "constant terms are not supported".into() });
        }
    }
    Ok((name, terms))
}

fn tokenize(lines: &[(usize, &str)]) -> Tokens {
    let mut toks = Vec::new();
    for &(n, l) in lines {
        let l = l.split('\\').next().unwrap_or("");
        let mut spaced = String::with_capacity(l.len());
        // keep operators apart from their neighbours
        let chars: Vec<char> = l.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '<' || c == '>' || c == '=' {
                spaced.push(' ');
                spaced.push(c);
                if i + 1 < chars.len() && matches!(chars[i + 1], '<' | '>' | '=') {
                    spaced.push(chars[i + 1]);
                    i += 1;
                }
                spaced.push(' ');
            } else {
                spaced.push(c);
            }
            i += 1;
        }
        toks.extend(spaced.split_whitespace().map(|t| (n, t.to_string())));
    }
    Tokens { toks, pos: 0 }
}

pub fn parse_lp(text: &str) -> Result<LpModel> {
    let mut sections: Vec<(Section, Vec<(usize, &str)>)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        if line.trim_start().starts_with('\\') || line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_header(line) {
            sections.push((s, Vec::new()));
            continue;
        }
        match sections.last_mut() {
            Some((Section::Done, _)) | None => {
                return Err(Error::Parse { line: n, msg: format!("text outside a section: '{}'", line.trim()) })
            }
            Some((_, body)) => body.push((n, line)),
        }
    }
    let mut model = LpModel::default();
    let mut seen_objective = false;
    for (sec, body) in sections {
        let mut tk = tokenize(&body);
        match sec {
            Section::Objective => {
                seen_objective = true;
                let (_, terms) = parse_expr(&mut tk, false)?;
                model.objective = terms;
            }
            Section::Constraints => {
                while tk.peek().is_some() {
                    let (name, terms) = parse_expr(&mut tk, true)?;
                    let Some((line, op)) = tk.next() else {
                        return Err(Error::Parse { line: tk.line(), msg: "constraint without a comparison".into() });
                    };
                    let sense = match op.as_str() {
                        "<=" | "=<" | "<" => RowKind::Le,
                        ">=" | "=>" | ">" => RowKind::Ge,
                        "=" => RowKind::Eq,
                        _ => return Err(Error::Parse { line, msg: format!("expected a comparison, got '{op}'") }),
                    };
                    let mut rhs_sign = 1.0;
                    let rhs = loop {
                        let Some((line, t)) = tk.next() else {
                            return Err(Error::Parse { line, msg: "missing right-hand side".into() });
                        };
                        match t.as_str() {
                            "+" => {}
                            "-" => rhs_sign = -rhs_sign,
                            _ => {
                                break parse_num(&t)
                                    .ok_or_else(|| Error::Parse { line, msg: format!("bad right-hand side '{t}'") })?
                            }
                        }
                    };
                    let name = name.unwrap_or_else(|| format!("r{}", model.rows.len() + 1));
                    model.rows.push(LpRow { name, terms, sense, rhs: rhs_sign * rhs });
                }
            }
            Section::Bounds => {
                for (n, line) in body {
                    parse_bound(&mut model, n, line)?;
                }
            }
            Section::Binary => {
                while let Some((_, t)) = tk.next() {
                    model.binary.push(t);
                }
            }
            Section::General => {
                while let Some((_, t)) = tk.next() {
                    model.general.push(t);
                }
            }
            Section::Done => {}
        }
    }
    if !seen_objective {
        return Err(Error::Parse { line: 1, msg: "no Minimize section".into() });
    }
    Ok(model)
}

fn parse_bound(model: &mut LpModel, n: usize, line: &str) -> Result<()> {
    let toks: Vec<String> = tokenize(&[(n, line)]).toks.into_iter().map(|(_, t)| t).collect();
    let err = |msg: &str| Error::Parse { line: n, msg: format!("{msg}: '{}'", line.trim()) };
    let entry = |model: &mut LpModel, v: &str| *model.bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
    match toks.as_slice() {
        [v, f] if f.eq_ignore_ascii_case("free") => {
            model.bounds.insert(v.clone(), (f64::NEG_INFINITY, f64::INFINITY));
        }
        [lo, a, v, b, hi] if a == "<=" && b == "<=" => {
            let lo = parse_num(lo).ok_or_else(|| err("bad lower bound"))?;
            let hi = parse_num(hi).ok_or_else(|| err("bad upper bound"))?;
            model.bounds.insert(v.clone(), (lo, hi));
        }
        [v, op, x] if parse_num(v).is_none() => {
            let x = parse_num(x).ok_or_else(|| err("bad bound"))?;
            let (lo, hi) = entry(model, v);
            let b = match op.as_str() {
                "<=" => (lo, x),
                ">=" => (x, hi),
                "=" => (x, x),
                _ => return Err(err("bad bound operator")),
            };
            model.bounds.insert(v.clone(), b);
        }
        _ => return Err(err("unsupported bound")),
    }
    Ok(())
}

/// Expected variable and row counts of [`emit_milp`].
pub fn milp_counts(inst: &SearchInstance, kind: ProblemKind) -> (usize, usize) {
    let (c, t, i) = (inst.grid().cell_count(), inst.horizon(), inst.scenario_count());
    let k = target_count(kind);
    let vars = c * t + k * i * (t + 1);
    let rows = usize::from(kind == ProblemKind::Sp2) + t + c * (t - 1) + 2 * k * i;
    (vars, rows)
}
