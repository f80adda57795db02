use std::path::Path;
use std::sync::Arc;

use proptest::prelude::*;
use rayon::prelude::*;

use valley_codes::bitstream::BitString;
use valley_codes::channel::{transmit, ChannelModel, RngSpec};
use valley_codes::harness::{self, run_attributed_trial, run_dfp, BuiltCode, Outcome, Stage};
use valley_codes::inner_code::{random_message, InnerCodec, TrialMessage};
use valley_codes::recursive::{AlignStatus, RecursiveCode};

fn k8_code() -> Arc<RecursiveCode> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/recursive_k8.json");
    Arc::new(harness::load_recursive(&path).unwrap())
}

fn bit_vec(max: usize) -> impl Strategy<Value = BitString> {
    proptest::collection::vec(0u8..2, 0..max).prop_map(BitString::from_bits)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoded_length_is_fixed(seed in any::<u64>()) {
        let code = k8_code();
        let cfg = code.config();
        let message = random_message(code.message_len(), &mut RngSpec::new(seed, 0).rng());
        let n_prime = (cfg.k() + 2 * cfg.t) * (cfg.inner.n + 4 * cfg.derived.alpha + 2 * cfg.derived.beta);
        prop_assert_eq!(code.encode(&message).unwrap().len(), n_prime);
        prop_assert_eq!(n_prime, cfg.derived.n_prime);
    }

    #[test]
    fn transmit_is_a_function_of_its_seed(x in bit_vec(300), seed in any::<u64>(), stream in any::<u64>(), p in 0.0..0.9f64) {
        for channel in [ChannelModel::Bdc(p), ChannelModel::Prc(p * 10.0)] {
            let spec = RngSpec::new(seed, stream);
            let y = transmit(channel, &x, spec);
            prop_assert_eq!(&transmit(channel, &x, spec), &y);
            if channel.is_bdc() {
                prop_assert!(y.len() <= x.len());
            }
        }
    }

    #[test]
    fn noiseless_round_trip(seed in any::<u64>()) {
        let code = k8_code();
        let message = random_message(code.message_len(), &mut RngSpec::new(seed, 1).rng());
        prop_assert_eq!(code.decode(&code.encode(&message).unwrap()).unwrap(), message);
    }
}

#[test]
fn transmit_same_under_parallelism() {
    let x = BitString::from_bits((0..500u32).map(|i| (i % 3 == 0) as u8));
    let channel = ChannelModel::Prc(1.5);
    let serial: Vec<BitString> = (0..200).map(|i| transmit(channel, &x, RngSpec::new(5, i))).collect();
    let parallel: Vec<BitString> = (0..200u64).into_par_iter().map(|i| transmit(channel, &x, RngSpec::new(5, i))).collect();
    assert_eq!(serial, parallel);
}

#[test]
fn failure_rate_grows_with_deletion_probability() {
    let code = BuiltCode::Recursive(k8_code());
    let rates: Vec<u64> = [0.05, 0.1, 0.2]
        .iter()
        .map(|&p| run_dfp(&code, ChannelModel::Bdc(p), 1000, 17, 4).unwrap().failures)
        .collect();
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
}

#[test]
fn stages_agree_with_traces() {
    let code = k8_code();
    let built = BuiltCode::Recursive(code.clone());
    let channel = ChannelModel::Bdc(0.2);
    let cfg = code.config();
    let mut seen = std::collections::HashSet::new();
    for i in 0..600 {
        let spec = RngSpec::new(23, i);
        let record = run_attributed_trial(&built, channel, TrialMessage::Uniform, i, spec);
        let Some(stage) = record.stage else {
            assert_eq!(record.outcome, Outcome::Success);
            continue;
        };
        seen.insert(stage);
        let message = random_message(code.message_len(), &mut spec.substream(1).rng());
        let y = transmit(channel, &code.encode(&message).unwrap(), spec);
        assert_eq!(y.len(), record.n_received);
        let (result, trace) = code.decode_traced(&y);
        assert!(result.map_or(true, |m| m != message));
        match stage {
            Stage::Alignment => assert!(trace.alignment_failures() >= 1),
            Stage::Rs => {
                assert!(trace.delimiters.iter().all(|d| d.center.status == AlignStatus::Ok));
                assert!(trace.segments.len() <= cfg.k() + 2 * cfg.t);
            }
            Stage::Cut | Stage::Inner => assert_eq!(trace.alignment_failures(), 0),
        }
    }
    assert!(seen.contains(&Stage::Alignment) && seen.len() >= 2, "{seen:?}");
}
