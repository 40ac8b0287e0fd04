use proptest::prelude::*;

use conecell::cointerval::{build_hom_complex, face_of_symbol, homcone_resolution, is_cointerval_ideal, symbol_of_face, DGraph};
use conecell::complex::{compare_up_to_degree_sign, symbol_counts};
use conecell::corpus::{borel_closure, random_family, standard_order, CorpusSpec};
use conecell::decomp::FacePoset;
use conecell::ek::{build_ek_cw, cellular_chain_complex, check_boundary_formula};
use conecell::linalg::{exact_rank, rank_bareiss, rank_mod_p, rank_rational, ExactMatrix, RankConfig, DEFAULT_PRIME};
use conecell::verify::check_cellular_resolution;
use conecell::{
    check_dd_zero, check_minimal, find_linear_quotient_order, ht_resolution, iterated_cone_resolution, DecompRule, Monomial,
    OrderedIdeal,
};

fn random_ideal(seed: u64) -> OrderedIdeal {
    let spec = CorpusSpec { random_count: 1, seed, ..Default::default() };
    random_family(&spec).remove(0).ideal
}

fn monomial(n: usize) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0u32..4, n).prop_map(Monomial::from_exponents)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lcm_gcd_lattice(a in monomial(4), b in monomial(4)) {
        let l = a.lcm(&b);
        let g = a.gcd(&b);
        prop_assert!(a.divides(&l) && b.divides(&l));
        prop_assert!(g.divides(&a) && g.divides(&b));
        prop_assert_eq!(l.mul(&g), a.mul(&b));
    }

    #[test]
    fn resolutions_of_random_ideals(seed in any::<u64>()) {
        let ideal = random_ideal(seed);
        let sets = ideal.set_table().unwrap().clone();
        let ht = ht_resolution(&ideal).unwrap();
        prop_assert_eq!(&ht.ranks(), &symbol_counts(&sets));
        prop_assert!(check_dd_zero(&ht).zero);
        prop_assert!(check_minimal(&ht));
        prop_assert!(ht.check_homogeneous());
        let b = DecompRule::canonical_b(&ideal).unwrap();
        prop_assert_eq!(&iterated_cone_resolution(&ideal, &b).unwrap(), &ht.canonicalize());
    }

    #[test]
    fn cells_of_random_ideals(seed in any::<u64>()) {
        let ideal = random_ideal(seed);
        let x = build_ek_cw(&ideal).unwrap();
        prop_assert!(check_boundary_formula(&ideal, &x).is_ok());
        prop_assert!(x.simplices_affinely_independent());
        let cc = cellular_chain_complex(&x);
        let signs = compare_up_to_degree_sign(&cc, &ht_resolution(&ideal).unwrap());
        prop_assert!(signs.is_ok(), "{:?}", signs);
        let report = check_cellular_resolution(&cc, &ideal, RankConfig::default()).unwrap();
        prop_assert!(report.resolution);
    }

    #[test]
    fn decomposition_divides(seed in any::<u64>(), extra in monomial(6)) {
        let ideal = random_ideal(seed);
        let n = ideal.nvars();
        let m = ideal.gen(0).mul(&Monomial::from_exponents(extra.exponents()[..n].to_vec()));
        let b = ideal.decomp_b(&m).unwrap();
        prop_assert!(ideal.gen(b).divides(&m));
        prop_assert!(ideal.gens()[..b].iter().all(|g| !g.divides(&m)));
    }

    #[test]
    fn linear_quotient_search_recovers_an_order(seed in any::<u64>(), rot in 0usize..8) {
        let ideal = random_ideal(seed);
        let mut order: Vec<usize> = (0..ideal.len()).collect();
        order.rotate_left(rot % ideal.len());
        let shuffled = ideal.reordered(&order);
        let found = find_linear_quotient_order(shuffled.nvars(), shuffled.gens()).expect("an order exists");
        prop_assert!(shuffled.reordered(&found).linear_quotients().is_ok());
    }

    #[test]
    fn equigenerated_stable_steps_keep_degree(n in 1usize..5, exps in prop::collection::vec(0u32..3, 4)) {
        let seed = Monomial::from_exponents(exps[..n].to_vec());
        prop_assume!(!seed.is_one());
        let ideal = standard_order(n, borel_closure(n, &[seed]));
        let sets = ideal.set_table().unwrap();
        for (j, set) in sets.iter().enumerate() {
            for &t in set {
                let g = ideal.decomp_b_step(j, t);
                prop_assert_eq!(ideal.gen(g).degree(), ideal.gen(j).degree());
            }
        }
    }

    #[test]
    fn ranks_agree_across_fields(rows in prop::collection::vec(prop::collection::vec(-3i64..4, 5), 1..6)) {
        let m = ExactMatrix::from_dense(&rows);
        let q = rank_rational(&m);
        prop_assert_eq!(q, rank_bareiss(&rows));
        prop_assert_eq!(q, rank_mod_p(&m, DEFAULT_PRIME));
        prop_assert_eq!(q, exact_rank(&m, RankConfig::default()));
        prop_assert_eq!(q, exact_rank(&m, RankConfig::rational_only()));
    }

    #[test]
    fn fingerprint_ignores_cell_order(seed in any::<u64>(), shift in 1usize..50) {
        let ideal = random_ideal(seed);
        let x = build_ek_cw(&ideal).unwrap();
        let p = FacePoset::from_cw(&x);
        let len = p.dims.len();
        let perm: Vec<usize> = (0..len).map(|i| (i + shift) % len).collect();
        let mut dims = vec![0; len];
        let mut covers = vec![Vec::new(); len];
        for (old, &new) in perm.iter().enumerate() {
            dims[new] = p.dims[old];
            covers[new] = p.covers[old].iter().map(|&f| perm[f]).collect();
        }
        prop_assert_eq!(FacePoset { dims, covers }.fingerprint(), p.fingerprint());
    }

    #[test]
    fn cointerval_graph_text_round_trip(mask in 1u32..(1 << 10)) {
        let pairs: Vec<Vec<usize>> = (0..5).flat_map(|a| (a + 1..5).map(move |b| vec![a, b])).collect();
        let edges: Vec<Vec<usize>> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e.clone()).collect();
        let g = DGraph::on_range(2, 5, edges).unwrap();
        prop_assert_eq!(&DGraph::parse(&g.to_text()).unwrap(), &g);
        let ideal = g.edge_ideal().unwrap();
        if is_cointerval_ideal(&ideal) {
            prop_assert!(ideal.linear_quotients().is_ok());
            let x = build_hom_complex(&g);
            for cell in x.cells() {
                let s = symbol_of_face(&ideal, cell).unwrap();
                prop_assert_eq!(&face_of_symbol(&ideal, &s).unwrap(), cell);
            }
            let hom = homcone_resolution(&ideal).unwrap();
            prop_assert!(check_dd_zero(&hom).zero && check_minimal(&hom));
        }
    }
}
