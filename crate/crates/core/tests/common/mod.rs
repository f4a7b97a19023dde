//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cantor_measure::{BinWord, Rational};

pub fn w(s: &str) -> BinWord {
    s.parse().unwrap()
}

pub fn set(list: &[&str]) -> BTreeSet<BinWord> {
    list.iter().map(|s| w(s)).collect()
}

/// Membership in the block-periodic tree with block length `k`.
pub fn block_member(k: usize, blocks: &BTreeSet<BinWord>, v: &BinWord) -> bool {
    (0..v.len()).step_by(k).all(|a| {
        let end = (a + k).min(v.len());
        let part: Vec<u8> = v.bits()[a..end].to_vec();
        blocks.iter().any(|b| b.bits().starts_with(&part))
    })
}

/// Branching points strictly below `v`, by probing both children.
pub fn naive_level(member: &dyn Fn(&BinWord) -> bool, v: &BinWord) -> usize {
    (0..v.len())
        .filter(|&i| {
            let u = BinWord::from_bits(v.bits()[..i].to_vec());
            member(&u.child(0)) && member(&u.child(1))
        })
        .count()
}

pub fn naive_nodes(member: &dyn Fn(&BinWord) -> bool, n: usize) -> Vec<BinWord> {
    BinWord::all_of_length(n).filter(|v| member(v)).collect()
}

pub fn pow2_inv(e: usize) -> Rational {
    let mut r = Rational::one();
    for _ in 0..e {
        r = r.half();
    }
    r
}
