use proptest::prelude::*;

use aztec_core::arith::{Backend, Rational};
use aztec_core::diamond::{corner_id, vertex_count, CellGrid, CellWeights};
use aztec_core::exec::Exec;
use aztec_core::probs::{prob_sweep, prob_sweep_any, AnyProbs};
use aztec_core::reduce::{build_trace, epsilonize, reduce_trace, reduce_trace_with, AnyTrace};
use aztec_core::shuffle::{asm_of_matching, AnySampler, RandomSource, Sampler};

fn weighting(max_order: usize) -> impl Strategy<Value = CellGrid<Rational>> {
    (1..=max_order).prop_flat_map(|n| {
        proptest::collection::vec((1i64..=6, 1i64..=4), 4 * n * n).prop_map(move |ws| {
            let mut it = ws.into_iter().map(|(a, b)| Rational::ratio(a, b));
            CellGrid::from_fn(n, |_, _| CellWeights::from_fn(|_| it.next().unwrap()))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probabilities_cover_every_vertex_once(g in weighting(6)) {
        let p = prob_sweep(&reduce_trace(&g).unwrap(), Exec::default()).unwrap();
        let n = g.order();
        let mut cover = vec![Rational::zero(); vertex_count(n)];
        for (r, c, slot, v) in p.entries() {
            prop_assert!(!v.is_negative() && *v <= Rational::one());
            let (a, b) = slot.corners();
            for corner in [a, b] {
                let id = corner_id(n, r, c, corner);
                cover[id] = &cover[id] + v;
            }
        }
        prop_assert!(cover.iter().all(|s| s.is_one()));
    }

    #[test]
    fn traces_are_consistent(g in weighting(6)) {
        let t = reduce_trace(&g).unwrap();
        t.verify(Exec::Sequential).unwrap();
        let product = (1..=t.order()).flat_map(|k| t.factors(k).to_vec()).fold(Rational::one(), |a, f| &a * &f);
        prop_assert_eq!(t.count(), product);
    }

    #[test]
    fn execution_modes_agree(g in weighting(6), seed in any::<u64>()) {
        let seq = reduce_trace_with(&g, Exec::Sequential).unwrap();
        let par = reduce_trace_with(&g, Exec::Parallel).unwrap();
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(prob_sweep(&seq, Exec::Sequential).unwrap(), prob_sweep(&par, Exec::Parallel).unwrap());
        let sampler = Sampler::new(&seq).unwrap();
        prop_assert_eq!(
            aztec_core::shuffle::sample_many(&sampler, seed, 8, Exec::Sequential),
            aztec_core::shuffle::sample_many(&sampler, seed, 8, Exec::Parallel)
        );
    }

    #[test]
    fn samples_are_perfect_and_reproducible(g in weighting(8), seed in any::<u64>()) {
        let sampler = AnySampler::new(&build_trace(&g, Backend::ExactRational, Exec::default()).unwrap()).unwrap();
        let m = sampler.sample(&mut RandomSource::new(seed));
        prop_assert!(m.is_perfect());
        prop_assert!(asm_of_matching(&m).is_valid());
        prop_assert_eq!(m, sampler.sample(&mut RandomSource::new(seed)));
    }

    #[test]
    fn backends_agree(g in weighting(5)) {
        let exact = prob_sweep(&reduce_trace(&g).unwrap(), Exec::default()).unwrap();
        let eps = prob_sweep_any(&AnyTrace::Eps(reduce_trace(&epsilonize(&g)).unwrap()), Exec::default()).unwrap();
        let AnyProbs::Exact(eps) = eps else { unreachable!() };
        prop_assert_eq!(&exact, &eps);
        let float = build_trace(&g, Backend::Float64, Exec::default()).unwrap();
        let float = prob_sweep_any(&float, Exec::default()).unwrap().as_f64();
        for ((_, _, _, a), (_, _, _, b)) in exact.entries().zip(float.entries()) {
            prop_assert!((a.to_f64() - b).abs() < 1e-9);
        }
    }
}
