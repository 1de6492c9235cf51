//! Enumeration oracles for the dynamic-programming string measures.
//!
//! An alignment with linear gaps is fully determined by its set of
//! substitution columns: a strictly increasing sequence of index pairs
//! `(i_1, j_1) < ... < (i_k, j_k)`. Every such set is enumerated and scored
//! in closed form, with no recurrence over prefixes.

#[derive(Debug, Clone, PartialEq)]
pub struct OracleScores {
    pub edit: usize,
    pub lcs: usize,
    pub global: f64,
    pub local: f64,
    pub semiglobal: f64,
}

struct Ctx<'a, F> {
    a: &'a [u8],
    b: &'a [u8],
    sub: F,
    gap: f64,
    out: OracleScores,
}

impl<F: Fn(u8, u8) -> f64> Ctx<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn visit(
        &mut self,
        next_i: usize,
        next_j: usize,
        k: usize,
        sub_sum: f64,
        mismatches: usize,
        first: (usize, usize),
    ) {
        let (n, m) = (self.a.len(), self.b.len());
        let gap = self.gap;

        let edit = mismatches + (n - k) + (m - k);
        self.out.edit = self.out.edit.min(edit);
        if mismatches == 0 {
            self.out.lcs = self.out.lcs.max(k);
        }
        let global = sub_sum + gap * (n + m - 2 * k) as f64;
        if global > self.out.global {
            self.out.global = global;
        }
        if k > 0 {
            let (i1, j1) = first;
            let (ik, jk) = (next_i - 1, next_j - 1);
            let interior = (ik - i1 + 1 - k) + (jk - j1 + 1 - k);
            let local = sub_sum + gap * interior as f64;
            if local > self.out.local {
                self.out.local = local;
            }
            let lead = i1.min(j1);
            let trail = (n - 1 - ik).min(m - 1 - jk);
            let semi = local + gap * (lead + trail) as f64;
            if semi > self.out.semiglobal {
                self.out.semiglobal = semi;
            }
        }

        for i in next_i..n {
            for j in next_j..m {
                let s = (self.sub)(self.a[i], self.b[j]);
                let mis = usize::from(self.a[i] != self.b[j]);
                let first = if k == 0 { (i, j) } else { first };
                self.visit(i + 1, j + 1, k + 1, sub_sum + s, mismatches + mis, first);
            }
        }
    }
}

/// Brute-force scores under substitution function `sub` and gap `gap`.
/// Edit distance and LCS ignore `sub` and use symbol equality.
pub fn enumerate<F: Fn(u8, u8) -> f64>(a: &[u8], b: &[u8], sub: F, gap: f64) -> OracleScores {
    let mut ctx = Ctx {
        a,
        b,
        sub,
        gap,
        out: OracleScores {
            edit: usize::MAX,
            lcs: 0,
            global: f64::NEG_INFINITY,
            local: 0.0,
            semiglobal: 0.0,
        },
    };
    ctx.visit(0, 0, 0, 0.0, 0, (0, 0));
    ctx.out
}

pub fn match_mismatch(matched: f64, mismatched: f64) -> impl Fn(u8, u8) -> f64 {
    move |x, y| if x == y { matched } else { mismatched }
}

/// Calls `f` on every string of length `len` over `0..alphabet` whose
/// symbols appear in order of first occurrence (restricted growth strings).
/// Every string is equivalent to exactly one of these under relabelling.
pub fn for_each_canonical(len: usize, alphabet: u8, mut f: impl FnMut(&[u8])) {
    fn rec(buf: &mut Vec<u8>, len: usize, alphabet: u8, max_used: u8, f: &mut impl FnMut(&[u8])) {
        if buf.len() == len {
            f(buf);
            return;
        }
        let limit = (max_used + 1).min(alphabet);
        for s in 0..limit {
            buf.push(s);
            rec(buf, len, alphabet, max_used.max(s + 1), f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(len);
    rec(&mut buf, len, alphabet, 0, &mut f);
}

/// Every full alignment (sequence of columns) of `a` and `b`, scored column
/// by column. Used as a second, path-based oracle on short strings.
pub fn path_scores<F: Fn(u8, u8) -> f64>(a: &[u8], b: &[u8], sub: &F, gap: f64) -> (f64, f64) {
    // returns (best global, best semiglobal)
    fn rec<F: Fn(u8, u8) -> f64>(
        a: &[u8],
        b: &[u8],
        sub: &F,
        gap: f64,
        cols: &mut Vec<(Option<u8>, Option<u8>)>,
        best: &mut (f64, f64),
    ) {
        if a.is_empty() && b.is_empty() {
            let g: f64 = cols.iter().map(|c| column(c, sub, gap)).sum();
            best.0 = best.0.max(g);
            best.1 = best.1.max(semi(cols, sub, gap));
            return;
        }
        if let (Some(&x), Some(&y)) = (a.first(), b.first()) {
            cols.push((Some(x), Some(y)));
            rec(&a[1..], &b[1..], sub, gap, cols, best);
            cols.pop();
        }
        if let Some(&x) = a.first() {
            cols.push((Some(x), None));
            rec(&a[1..], b, sub, gap, cols, best);
            cols.pop();
        }
        if let Some(&y) = b.first() {
            cols.push((None, Some(y)));
            rec(a, &b[1..], sub, gap, cols, best);
            cols.pop();
        }
    }
    fn column<F: Fn(u8, u8) -> f64>(c: &(Option<u8>, Option<u8>), sub: &F, gap: f64) -> f64 {
        match *c {
            (Some(x), Some(y)) => sub(x, y),
            _ => gap,
        }
    }
    fn semi<F: Fn(u8, u8) -> f64>(cols: &[(Option<u8>, Option<u8>)], sub: &F, gap: f64) -> f64 {
        let kind = |c: &(Option<u8>, Option<u8>)| (c.0.is_some(), c.1.is_some());
        let mut lo = 0;
        if let Some(first) = cols.first().map(kind).filter(|k| k.0 != k.1) {
            while lo < cols.len() && kind(&cols[lo]) == first {
                lo += 1;
            }
        }
        let mut hi = cols.len();
        if let Some(last) = cols[lo..].last().map(kind).filter(|k| k.0 != k.1) {
            while hi > lo && kind(&cols[hi - 1]) == last {
                hi -= 1;
            }
        }
        cols[lo..hi].iter().map(|c| column(c, sub, gap)).sum()
    }
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    rec(a, b, sub, gap, &mut Vec::new(), &mut best);
    best
}
