mod common;

use ngdbf::analysis::f_max;
use ngdbf::channel::saturate;
use ngdbf::harness::{frame_samples, frame_streams};
use ngdbf::ngdbf::NgdbfParams;
use ngdbf::strategy::DecoderSpec;
use ngdbf::{ebn0_to_sigma, BipolarVector, QuantizerSpec};

const Y_MAX: f64 = 2.5;

fn adaptive(theta: f64, lambda: f64, eta: f64, max_iterations: usize) -> NgdbfParams {
    NgdbfParams {
        theta,
        lambda,
        eta,
        w: 0.75,
        smoothing_window: None,
        noise_policy: None,
        max_iterations,
    }
}

fn every_kind() -> Vec<DecoderSpec> {
    vec![
        DecoderSpec::SGdbf {
            max_iterations: 100,
        },
        DecoderSpec::MGdbf {
            theta: -0.6,
            mode_switch: true,
            max_iterations: 100,
        },
        DecoderSpec::AtGdbf {
            theta: -0.9,
            lambda: 0.99,
            max_iterations: 100,
        },
        DecoderSpec::SNgdbf {
            w: 0.75,
            eta: 1.0,
            noise_policy: Default::default(),
            max_iterations: 100,
        },
        DecoderSpec::MNgdbf {
            params: adaptive(-0.9, 0.99, 0.95, 100),
        },
        DecoderSpec::SmNgdbf {
            params: NgdbfParams {
                smoothing_window: Some(64),
                ..adaptive(-0.9, 0.99, 0.95, 300)
            },
        },
        DecoderSpec::QuantizedMNgdbf {
            params: adaptive(-0.7, 0.99, 0.95, 100),
            quantizer: QuantizerSpec::new(4, 1.75).unwrap(),
            datapath: Default::default(),
        },
        DecoderSpec::MinSum { max_iterations: 10 },
    ]
}

#[test]
fn noiseless_frames_stop_before_iterating() {
    let code = common::peg_code();
    let y = vec![1.0; code.n()];
    for spec in every_kind() {
        let dec = spec.prepare(&code).unwrap();
        let mut streams = frame_streams(0, 10.0, 0);
        let r = dec.decode(&y, 0.5, Y_MAX, &mut streams.decoder, false);
        assert!(r.success, "{}", spec.name());
        assert_eq!(r.iterations, 0, "{}", spec.name());
        assert_eq!(r.decisions.weight(), 0, "{}", spec.name());
    }
}

#[test]
fn successful_decodes_end_on_codewords() {
    let code = common::peg_code();
    let sigma = ebn0_to_sigma(3.5, code.rate_f64());
    for spec in every_kind() {
        let dec = spec.prepare(&code).unwrap();
        for f in 0..20 {
            let mut streams = frame_streams(3, 3.5, f);
            let y = frame_samples(code.n(), sigma, &mut streams);
            let r = dec.decode(&y, sigma, Y_MAX, &mut streams.decoder, false);
            assert!(r.iterations <= spec.max_iterations());
            if r.success {
                assert!(code.is_codeword(&r.decisions).unwrap(), "{}", spec.name());
            } else {
                assert_eq!(r.iterations, spec.max_iterations(), "{}", spec.name());
            }
        }
    }
}

#[test]
fn objective_trace_matches_reference_objective() {
    let code = common::peg_code();
    let sigma = ebn0_to_sigma(3.0, code.rate_f64());
    let spec = DecoderSpec::MGdbf {
        theta: -0.6,
        mode_switch: true,
        max_iterations: 100,
    };
    let dec = spec.prepare(&code).unwrap();
    for f in 0..10 {
        let mut streams = frame_streams(5, 3.0, f);
        let y = frame_samples(code.n(), sigma, &mut streams);
        let r = dec.decode(&y, sigma, Y_MAX, &mut streams.decoder, true);
        let trace = r.objective_trace.as_ref().unwrap();
        assert_eq!(trace.len(), r.iterations + 1);
        let seen: Vec<f64> = y.iter().map(|&v| saturate(v, Y_MAX)).collect();
        let expected = common::reference_objective(&code, r.decisions.as_slice(), &seen);
        assert!((r.final_objective - expected).abs() < 1e-9);
        assert_eq!(*trace.last().unwrap(), r.final_objective);
    }
}

/// A frame on which M-GDBF stalls at a wrong local maximum while adaptive
/// M-NGDBF reaches the transmitted codeword.
#[test]
fn perturbation_rescues_a_trapped_frame() {
    let code = common::peg_code();
    let ebn0 = 4.0;
    let sigma = ebn0_to_sigma(ebn0, code.rate_f64());
    let plain = DecoderSpec::MGdbf {
        theta: -0.6,
        mode_switch: true,
        max_iterations: 100,
    }
    .prepare(&code)
    .unwrap();
    let noisy = DecoderSpec::MNgdbf {
        params: adaptive(-0.9, 0.94, 0.95, 100),
    }
    .prepare(&code)
    .unwrap();
    let rescued = (0..500).find_map(|f| {
        let mut streams = frame_streams(1, ebn0, f);
        let y = frame_samples(code.n(), sigma, &mut streams);
        let mut rng_plain = streams.decoder.clone();
        let a = plain.decode(&y, sigma, Y_MAX, &mut rng_plain, true);
        let b = noisy.decode(&y, sigma, Y_MAX, &mut streams.decoder, false);
        (!a.success && b.success && b.decisions.weight() == 0).then_some((a, y))
    });
    let (trapped, y) = rescued.expect("some frame in the first 500 is rescued");
    // the stall point scores below the transmitted codeword
    let seen: Vec<f64> = y.iter().map(|&v| saturate(v, Y_MAX)).collect();
    let codeword_score = f_max(code.m(), &BipolarVector::ones(code.n()), &seen);
    assert!(trapped.final_objective < codeword_score);
    assert!(trapped.decisions.weight() > 0);
}
