//! Worked values checked against brute-force enumeration, then frozen.

mod common;

use cantor_measure::constructions::{self, Named, K_BLOCKS, L_BLOCKS};
use cantor_measure::measure;
use cantor_measure::script::{self, CompiledScript, RunOptions};
use cantor_measure::splits;
use cantor_measure::trees::{silver_split, SilverComponent, Tree, TreePresentation};
use cantor_measure::words::NatWord;
use cantor_measure::{BinWord, Rational};
use common::*;

fn k_tree() -> Tree {
    constructions::make_named(Named::E).tree
}

fn u_tree() -> Tree {
    constructions::make_named(Named::U).tree
}

#[test]
fn xor_and_interleave() {
    let (a, b) = (w("101000"), w("100100"));
    let brute: Vec<u8> = a.bits().iter().zip(b.bits()).map(|(x, y)| x ^ y).collect();
    assert_eq!(BinWord::from_bits(brute), w("001100"));
    assert_eq!(a.xor_sum(&b).unwrap(), w("001100"));

    let (u, v) = (w("0001"), w("0111"));
    let brute: Vec<u8> = (0..8).map(|i| if i % 2 == 0 { u.bit(i / 2) } else { v.bit(i / 2) }).collect();
    let z = BinWord::interleave(&u, &v).unwrap();
    assert_eq!(z, BinWord::from_bits(brute));
    assert_eq!(z, w("00010111"));
    assert_eq!(z.select(&[0, 2, 4, 6]).unwrap(), u);
    assert_eq!(z.select(&[1, 3, 5, 7]).unwrap(), v);
}

#[test]
fn children_of_k_tree() {
    let k = set(&K_BLOCKS);
    let member = |v: &BinWord| block_member(3, &k, v);
    let t = k_tree();
    for (node, expected) in [("", vec![0, 1]), ("01", vec![1])] {
        let brute: Vec<u8> = (0..2).filter(|&b| member(&w(node).child(b))).collect();
        assert_eq!(brute, expected);
        assert_eq!(t.children(&w(node)).unwrap(), expected);
    }
    assert_eq!(u_tree().children(&w("0")).unwrap(), vec![0]);
    assert!(t.is_perfect());
}

#[test]
fn k_tree_split_profile_and_levels() {
    let k = set(&K_BLOCKS);
    let member = |v: &BinWord| block_member(3, &k, v);
    let t = k_tree();
    let profile = splits::split_profile(&t, 3).unwrap();
    assert_eq!(profile.levels[0].points, set(&[""]));
    assert_eq!(profile.levels[1].points, set(&["0", "111"]));
    assert_eq!((profile.s(1), profile.big_s(1)), (1, 3));
    assert_eq!(profile.s(2), 2);

    for (node, lvl) in [("111", 1), ("011", 2)] {
        assert_eq!(naive_level(&member, &w(node)), lvl);
        assert_eq!(splits::level(&t, &w(node)).unwrap(), lvl as u32);
        assert_eq!(measure::mu_cylinder(&t, &w(node)).unwrap(), pow2_inv(lvl));
    }
    assert!(!splits::classify(&t, 64).unwrap().balanced);

    assert_eq!(splits::canon_embed(&t, &w("1")).unwrap(), w("111"));
    assert!(member(&w("000")) && member(&w("001")));
    assert_eq!(splits::canon_embed(&t, &w("00")).unwrap(), w("00"));
}

#[test]
fn u_tree_profile() {
    let t = u_tree();
    let profile = splits::split_profile(&t, 6).unwrap();
    for i in 0..6 {
        assert_eq!((profile.s(i), profile.big_s(i)), (2 * i, 2 * i));
    }
    let c = splits::classify(&t, 64).unwrap();
    assert!(c.balanced && c.uniform);
}

#[test]
fn clopen_from_table_rows() {
    let q = constructions::make_named(Named::Q).tree;
    let words = [w("0000"), w("0111")];
    assert_eq!(measure::mu_clopen(&q, &words).unwrap(), Rational::new(5, 16));
    let l = set(&L_BLOCKS);
    let member = |v: &BinWord| block_member(4, &l, v);
    let brute: Rational = words.iter().map(|v| pow2_inv(naive_level(&member, v))).sum();
    assert_eq!(brute, Rational::new(5, 16));
}

#[test]
fn traces_in_full_space() {
    let full = Tree::full();
    let k = set(&K_BLOCKS);
    let t = measure::trace_upper(&full, &k_tree(), 12).unwrap();
    for n in 0..=4 {
        let count = naive_nodes(&|v| block_member(3, &k, v), 3 * n).len();
        let brute = Rational::from_integer(count as u64) * pow2_inv(3 * n);
        assert_eq!(brute, pow2_inv(n));
        assert_eq!(t.upper_bounds[3 * n], brute);
    }
    let uu = set(&["00", "11"]);
    let t = measure::trace_upper(&full, &u_tree(), 12).unwrap();
    for n in 0..=6 {
        let count = naive_nodes(&|v| block_member(2, &uu, v), 2 * n).len();
        assert_eq!(count, 1 << n);
        assert_eq!(t.upper_bounds[2 * n], pow2_inv(n));
    }
    for x in [k_tree(), u_tree()] {
        assert_eq!(measure::trace_exact(&full, &x).unwrap().exact, Some(Rational::zero()));
    }
}

#[test]
fn lemma_bound_for_u_in_full() {
    for m in 0..=8 {
        let c = measure::lemma1_refine(&Tree::full(), &u_tree(), 2, m).unwrap();
        assert_eq!(c.bound, Rational::new(3, 4).pow(m as u32));
    }
}

#[test]
fn product_values() {
    let uu = set(&["00", "11"]);
    let member = |v: &BinWord| block_member(2, &uu, v);
    let u = u_tree();
    let brute = pow2_inv(naive_level(&member, &w("00"))) * pow2_inv(naive_level(&member, &w("11")));
    assert_eq!(measure::product_measure(&u, &u, &w("0101")).unwrap(), brute);
    assert_eq!(brute, Rational::new(1, 4));

    let e = k_tree();
    let v = BinWord::interleave(&w("111"), &w("111")).unwrap();
    assert_eq!(measure::product_measure(&e, &e, &v).unwrap(), Rational::new(1, 4));
}

#[test]
fn baire_and_lusin_first_stage() {
    assert_eq!(measure::baire_measure(&NatWord::new(vec![1, 0])), Rational::new(1, 8));
    let t = constructions::lusin_tree(3, 1 << 16).unwrap();
    assert_eq!(t.stages[0].branching, vec![2]);
    assert_eq!(t.stages[0].removed, Rational::new(1, 4));
}

#[test]
fn silver_split_of_alternating_period() {
    let s = TreePresentation::silver(vec![], vec![-1, 0]).unwrap();
    let (a, b) = silver_split(&s, 8).unwrap();
    assert_eq!(a, SilverComponent::Perfect(TreePresentation::Full));
    assert!(b.is_finite());
    let b = Tree::compile(b.presentation().clone()).unwrap();
    assert_eq!(b.nodes_at(8).unwrap(), vec![BinWord::repeat(0, 8)]);
}

#[test]
fn z2_pair() {
    assert!(constructions::z2_independent(&[w("10"), w("01")], (0, 2)).unwrap());
    assert!(!constructions::z2_independent(&[w("11"), w("11")], (0, 2)).unwrap());
}

#[test]
fn script_examples() {
    let text = "query trace U in FULL depth 10\nquery lemma1 U in FULL k 2 rounds 4\n";
    let c = CompiledScript::new(script::parse(text).unwrap(), RunOptions::default()).unwrap();
    let report = script::run(&c);
    let out = report.render();
    for (d, v) in [(2, "1/2"), (4, "1/4"), (6, "1/8"), (8, "1/16"), (10, "1/32")] {
        assert!(out.contains(&format!("hull {d} {v}\n")), "{out}");
    }
    assert!(out.contains("bound 81/256"), "{out}");
    assert_eq!(report.exit_code(), 0);
    assert!(report.certificates().contains("\nbound-certificate\n"));
}
