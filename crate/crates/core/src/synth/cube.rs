// SPDX-License-Identifier: Apache-2.0

//! Cubes (conjunctions of literals) keyed by signal name.

use std::collections::{BTreeMap, BTreeSet};

/// A conjunction of literals. Absent variables are don't-care; the empty
/// cube is the constant-true term.
pub type Cube = BTreeMap<String, bool>;

pub fn intersect(a: &Cube, b: &Cube) -> Option<Cube> {
    let mut out = a.clone();
    for (k, &v) in b {
        match out.get(k) {
            Some(&w) if w != v => return None,
            _ => {
                out.insert(k.clone(), v);
            }
        }
    }
    Some(out)
}

pub fn overlaps(a: &Cube, b: &Cube) -> bool {
    b.iter().all(|(k, v)| a.get(k).is_none_or(|w| w == v))
}

/// `a` minus `b` as a list of pairwise disjoint cubes.
pub fn sharp(a: &Cube, b: &Cube) -> Vec<Cube> {
    if !overlaps(a, b) {
        return vec![a.clone()];
    }
    let mut out = Vec::new();
    let mut rest = a.clone();
    for (k, &v) in b {
        if rest.contains_key(k) {
            continue;
        }
        let mut piece = rest.clone();
        piece.insert(k.clone(), !v);
        out.push(piece);
        rest.insert(k.clone(), v);
    }
    out
}

/// `a` minus the union of `bs`, as disjoint cubes.
pub fn sharp_all<'a>(a: &Cube, bs: impl IntoIterator<Item = &'a Cube>) -> Vec<Cube> {
    let mut cur = vec![a.clone()];
    for b in bs {
        cur = cur.iter().flat_map(|c| sharp(c, b)).collect();
        if cur.is_empty() {
            break;
        }
    }
    cur
}

pub fn satisfies(cube: &Cube, assignment: &BTreeMap<String, bool>) -> bool {
    cube.iter()
        .all(|(k, &v)| assignment.get(k).copied().unwrap_or(false) == v)
}

/// Repeated pairwise merging of cubes that differ in the polarity of exactly
/// one shared variable, followed by absorption. The covered set of
/// assignments is unchanged.
pub fn merge_adjacent(terms: &[Cube]) -> Vec<Cube> {
    let mut cur: BTreeSet<Cube> = terms.iter().cloned().collect();
    let mut primes: BTreeSet<Cube> = BTreeSet::new();
    loop {
        let v: Vec<&Cube> = cur.iter().collect();
        let mut used = vec![false; v.len()];
        let mut next: BTreeSet<Cube> = BTreeSet::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if let Some(m) = adjacent_merge(v[i], v[j]) {
                    used[i] = true;
                    used[j] = true;
                    next.insert(m);
                }
            }
        }
        for (i, c) in v.iter().enumerate() {
            if !used[i] {
                primes.insert((*c).clone());
            }
        }
        if next.is_empty() {
            break;
        }
        cur = next;
    }
    let all: Vec<Cube> = primes.into_iter().collect();
    all.iter()
        .enumerate()
        .filter(|(i, c)| {
            !all.iter().enumerate().any(|(j, d)| {
                j != *i && d.len() < c.len() && d.iter().all(|(k, v)| c.get(k) == Some(v))
            })
        })
        .map(|(_, c)| c.clone())
        .collect()
}

fn adjacent_merge(a: &Cube, b: &Cube) -> Option<Cube> {
    if a.len() != b.len() {
        return None;
    }
    let mut diff = None;
    for ((ka, va), (kb, vb)) in a.iter().zip(b) {
        if ka != kb {
            return None;
        }
        if va != vb {
            if diff.is_some() {
                return None;
            }
            diff = Some(ka);
        }
    }
    let k = diff?;
    let mut m = a.clone();
    m.remove(k);
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(pairs: &[(&str, bool)]) -> Cube {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn all_assignments(vars: &[&str]) -> Vec<BTreeMap<String, bool>> {
        (0..1u32 << vars.len())
            .map(|m| {
                vars.iter()
                    .enumerate()
                    .map(|(i, v)| (v.to_string(), m >> i & 1 == 1))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn sharp_is_exact_and_disjoint() {
        let a = cube(&[("x", true)]);
        let b = cube(&[("y", true), ("z", false)]);
        let parts = sharp(&a, &b);
        for asg in all_assignments(&["x", "y", "z"]) {
            let want = satisfies(&a, &asg) && !satisfies(&b, &asg);
            let hits = parts.iter().filter(|c| satisfies(c, &asg)).count();
            assert_eq!(hits, usize::from(want));
        }
    }

    #[test]
    fn merge_removes_mirrored_variable() {
        let t = vec![
            cube(&[("q0", true), ("q1", false), ("a", true)]),
            cube(&[("q0", true), ("q1", true), ("a", true)]),
            cube(&[("q0", false), ("q1", true)]),
        ];
        let m = merge_adjacent(&t);
        for asg in all_assignments(&["q0", "q1", "a"]) {
            let before = t.iter().any(|c| satisfies(c, &asg));
            let after = m.iter().any(|c| satisfies(c, &asg));
            assert_eq!(before, after);
        }
        assert!(m.contains(&cube(&[("q0", true), ("a", true)])));
    }
}
