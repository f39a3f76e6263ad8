//! Model strings.
//!
//! Compact form, mirroring names such as `kde-CoARMA(3,1)-(n,n,n)-(n)`:
//!
//! ```text
//! <margin>-CoARMA(<p>,<q>)-(<ar pairs>)-(<mag pairs>)
//! <margin>-AR(<p>)-(<ar pairs>)
//! <margin>-MAG(<q>)-(<mag pairs>)
//! ```
//!
//! Pipe form: `kde|ar:(gaussian:?,gaussian:?)|mag:(gaussian:?)`.
//!
//! A pair is `<family>[180][:<param>,...]` where a parameter is a number or `?`
//! (free). A bare family with parameters, e.g. `n`, has every parameter free.

use std::fmt;
use std::str::FromStr;

use crate::coarma::CoarmaSpec;
use crate::copula::{parse_family_token, CopulaSpec, Family, Rotation};
use crate::error::{CoarmaError, Result};
use crate::margins::MarginKind;
use crate::vine::split_pair_tokens;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTemplate {
    pub family: Family,
    pub rotation: Rotation,
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Ar,
    Mag,
}

/// Location of one free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSlot {
    pub side: Side,
    pub pair: usize,
    pub index: usize,
    pub family: Family,
    pub rotation: Rotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelTemplate {
    pub margin: MarginKind,
    pub ar: Vec<PairTemplate>,
    pub mag: Vec<PairTemplate>,
}

fn perr(pos: usize, msg: impl Into<String>) -> CoarmaError {
    CoarmaError::Parse { pos, msg: msg.into() }
}

impl PairTemplate {
    pub fn fixed(c: &CopulaSpec) -> Self {
        Self { family: c.family(), rotation: c.rotation(), slots: c.params().iter().map(|&v| Slot::Fixed(v)).collect() }
    }

    pub fn is_free(&self) -> bool {
        self.slots.contains(&Slot::Free)
    }

    fn parse_at(tok: &str, pos: usize) -> Result<Self> {
        let (name, rest) = match tok.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b)),
            None => (tok.trim(), None),
        };
        let (family, rotation) =
            parse_family_token(name).ok_or_else(|| perr(pos, format!("unknown pair family '{name}'")))?;
        let n = family.n_params();
        let slots = match rest {
            None => vec![Slot::Free; n],
            Some(rest) => {
                let mut off = pos + name.len() + 1;
                let mut slots = Vec::new();
                for part in rest.split(',') {
                    let t = part.trim();
                    slots.push(if t == "?" {
                        Slot::Free
                    } else {
                        Slot::Fixed(t.parse().map_err(|_| perr(off, format!("bad parameter '{t}'")))?)
                    });
                    off += part.len() + 1;
                }
                slots
            }
        };
        if slots.len() != n {
            return Err(perr(pos, format!("{} takes {n} parameter(s), got {}", family.name(), slots.len())));
        }
        let out = Self { family, rotation, slots };
        if !out.is_free() {
            out.to_copula().map_err(|e| perr(pos, e.to_string()))?;
        }
        Ok(out)
    }

    /// Copula with every free slot filled from `values`, consumed in order.
    fn fill(&self, values: &mut impl Iterator<Item = f64>) -> Result<CopulaSpec> {
        let mut ps = Vec::with_capacity(self.slots.len());
        for s in &self.slots {
            ps.push(match *s {
                Slot::Fixed(v) => v,
                Slot::Free => values.next().ok_or_else(|| CoarmaError::domain("too few free values"))?,
            });
        }
        if self.family == Family::Frank && ps[0] == 0.0 {
            ps[0] = 1e-9;
        }
        CopulaSpec::new(self.family, self.rotation, &ps)
    }

    pub fn to_copula(&self) -> Result<CopulaSpec> {
        self.fill(&mut std::iter::empty())
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, long: bool) -> fmt::Result {
        f.write_str(if long { self.family.name() } else { self.family.code() })?;
        if self.rotation == Rotation::R180 {
            f.write_str("180")?;
        }
        if self.slots.is_empty() || (!long && self.slots.iter().all(|s| *s == Slot::Free)) {
            return Ok(());
        }
        f.write_str(":")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match s {
                Slot::Fixed(v) => write!(f, "{v}")?,
                Slot::Free => f.write_str("?")?,
            }
        }
        Ok(())
    }
}

fn parse_pairs(body: &str, pos: usize) -> Result<Vec<PairTemplate>> {
    let mut out = Vec::new();
    let mut off = pos;
    for tok in split_pair_tokens(body) {
        let at = body[off - pos..].find(tok.split(',').next().unwrap_or("")).map_or(off, |i| off + i);
        out.push(PairTemplate::parse_at(&tok, at)?);
        off = at + tok.len();
    }
    Ok(out)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(perr(self.pos, format!("expected '{lit}'")))
        }
    }

    /// Contents of a parenthesized group, parentheses consumed.
    fn group(&mut self) -> Result<(&'a str, usize)> {
        self.expect("(")?;
        let start = self.pos;
        let end = self.rest().find(')').ok_or_else(|| perr(start, "unclosed '('"))?;
        self.pos += end + 1;
        Ok((&self.s[start..start + end], start))
    }

    fn usize_list(&mut self, n: usize) -> Result<Vec<usize>> {
        let (body, at) = self.group()?;
        let vals: Vec<&str> = body.split(',').collect();
        if vals.len() != n {
            return Err(perr(at, format!("expected {n} order(s)")));
        }
        vals.iter()
            .map(|v| v.trim().parse::<usize>().map_err(|_| perr(at, format!("bad order '{v}'"))))
            .collect()
    }
}

impl ModelTemplate {
    pub fn from_spec(margin: MarginKind, spec: &CoarmaSpec) -> Self {
        Self {
            margin,
            ar: spec.ar().pairs().iter().map(PairTemplate::fixed).collect(),
            mag: spec.mag().pairs().iter().map(PairTemplate::fixed).collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.mag.len()
    }

    pub fn free_slots(&self) -> Vec<FreeSlot> {
        let mut out = Vec::new();
        for (side, pairs) in [(Side::Ar, &self.ar), (Side::Mag, &self.mag)] {
            for (j, pt) in pairs.iter().enumerate() {
                for (k, s) in pt.slots.iter().enumerate() {
                    if *s == Slot::Free {
                        out.push(FreeSlot { side, pair: j, index: k, family: pt.family, rotation: pt.rotation });
                    }
                }
            }
        }
        out
    }

    pub fn n_free(&self) -> usize {
        self.free_slots().len()
    }

    /// Fills the free slots (in `free_slots` order).
    pub fn instantiate(&self, values: &[f64]) -> Result<CoarmaSpec> {
        if values.len() != self.n_free() {
            return Err(CoarmaError::Shape { expected: self.n_free(), got: values.len() });
        }
        let mut it = values.iter().copied();
        let ar = self.ar.iter().map(|p| p.fill(&mut it)).collect::<Result<Vec<_>>>()?;
        let mag = self.mag.iter().map(|p| p.fill(&mut it)).collect::<Result<Vec<_>>>()?;
        Ok(CoarmaSpec::from_pairs(ar, mag))
    }

    /// The spec when no slot is free.
    pub fn to_spec(&self) -> Result<CoarmaSpec> {
        if self.n_free() > 0 {
            return Err(CoarmaError::domain(format!("model has {} free parameter(s)", self.n_free())));
        }
        self.instantiate(&[])
    }

    /// Same structure with every slot freed.
    pub fn freed(&self) -> Self {
        let free = |v: &Vec<PairTemplate>| {
            v.iter().map(|p| PairTemplate { slots: vec![Slot::Free; p.slots.len()], ..p.clone() }).collect()
        };
        Self { margin: self.margin, ar: free(&self.ar), mag: free(&self.mag) }
    }

    /// Long-name pipe form.
    pub fn to_pipe_string(&self) -> String {
        struct Long<'a>(&'a PairTemplate);
        impl fmt::Display for Long<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_with(f, true)
            }
        }
        let join = |v: &[PairTemplate]| v.iter().map(|p| Long(p).to_string()).collect::<Vec<_>>().join(",");
        format!("{}|ar:({})|mag:({})", self.margin.token(), join(&self.ar), join(&self.mag))
    }

    fn parse_pipe(s: &str) -> Result<Self> {
        let mut parts = s.split('|');
        let head = parts.next().unwrap_or("");
        let margin: MarginKind = head.trim().parse().map_err(|_| perr(0, format!("unknown margin '{head}'")))?;
        let mut off = head.len() + 1;
        let (mut ar, mut mag) = (None, None);
        for part in parts {
            let t = part.trim();
            let (name, body) = t.split_once(':').ok_or_else(|| perr(off, "expected 'ar:(...)' or 'mag:(...)'"))?;
            let body = body
                .trim()
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| perr(off, "pair list must be parenthesized"))?;
            let pairs = parse_pairs(body, off + name.len() + 2)?;
            let slot = match name.trim() {
                "ar" => &mut ar,
                "mag" => &mut mag,
                other => return Err(perr(off, format!("unknown section '{other}'"))),
            };
            if slot.replace(pairs).is_some() {
                return Err(perr(off, format!("duplicate section '{}'", name.trim())));
            }
            off += part.len() + 1;
        }
        Ok(Self { margin, ar: ar.unwrap_or_default(), mag: mag.unwrap_or_default() })
    }

    fn parse_compact(s: &str) -> Result<Self> {
        let dash = s.find('-').ok_or_else(|| perr(0, "expected '<margin>-'"))?;
        let margin: MarginKind = s[..dash].parse().map_err(|_| perr(0, format!("unknown margin '{}'", &s[..dash])))?;
        let mut c = Cursor { s, pos: dash + 1 };
        let head_end = c.rest().find('(').ok_or_else(|| perr(c.pos, "expected model order"))?;
        let head = c.rest()[..head_end].to_ascii_lowercase();
        let head_pos = c.pos;
        c.pos += head_end;
        let (p, q) = match head.as_str() {
            "coarma" => {
                let v = c.usize_list(2)?;
                (v[0], v[1])
            }
            "ar" => (c.usize_list(1)?[0], 0),
            "mag" | "ma" => (0, c.usize_list(1)?[0]),
            _ => return Err(perr(head_pos, format!("unknown model head '{}'", &s[head_pos..head_pos + head_end]))),
        };
        let mut lists = Vec::new();
        let n_lists = if head == "coarma" { 2 } else { 1 };
        for _ in 0..n_lists {
            c.expect("-")?;
            let (body, at) = c.group()?;
            lists.push((parse_pairs(body, at)?, at));
        }
        if !c.rest().is_empty() {
            return Err(perr(c.pos, "trailing characters"));
        }
        let (ar, mag) = match head.as_str() {
            "coarma" => {
                let mut it = lists.into_iter();
                (it.next().unwrap(), it.next().unwrap())
            }
            "ar" => (lists.pop().unwrap(), (Vec::new(), s.len())),
            _ => ((Vec::new(), s.len()), lists.pop().unwrap()),
        };
        if ar.0.len() != p {
            return Err(perr(ar.1, format!("AR order {p} but {} pair(s) given", ar.0.len())));
        }
        if mag.0.len() != q {
            return Err(perr(mag.1, format!("MAG order {q} but {} pair(s) given", mag.0.len())));
        }
        Ok(Self { margin, ar: ar.0, mag: mag.0 })
    }
}

impl FromStr for ModelTemplate {
    type Err = CoarmaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('|') {
            Self::parse_pipe(s)
        } else {
            Self::parse_compact(s)
        }
    }
}

impl fmt::Display for ModelTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        struct List<'a>(&'a [PairTemplate]);
        impl fmt::Display for List<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("(")?;
                for (i, p) in self.0.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    p.write_with(f, false)?;
                }
                f.write_str(")")
            }
        }
        let m = self.margin.token();
        if self.q() == 0 && self.p() > 0 {
            write!(f, "{m}-AR({})-{}", self.p(), List(&self.ar))
        } else {
            write!(f, "{m}-CoARMA({},{})-{}-{}", self.p(), self.q(), List(&self.ar), List(&self.mag))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frank_zero_is_nudged() {
        let t: ModelTemplate = "u-CoARMA(1,0)-(f:?)-()".parse().unwrap();
        assert!(t.instantiate(&[0.0]).is_ok());
    }
}
