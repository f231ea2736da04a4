use glam::DVec3;
use proptest::prelude::*;
use xrk_core::interaction::{recognize_swipe, IntentKind, PinchConfig, PinchTracker, SwipeConfig, SwipeDirection};
use xrk_core::model::{FrameDuration, HandJoint, HandState, Handedness, JOINT_COUNT};

fn hand_at(d: Option<f64>) -> HandState {
    match d {
        None => HandState::untracked(Handedness::Left),
        Some(d) => {
            let mut joints = [DVec3::ZERO; JOINT_COUNT];
            joints[HandJoint::IndexTip.index()] = DVec3::new(d, 0.0, 0.0);
            HandState::tracked(Handedness::Left, joints).unwrap()
        }
    }
}

/// Distance samples biased toward the hysteresis band, with tracking gaps.
fn distances() -> impl Strategy<Value = Vec<Option<f64>>> {
    let sample = prop_oneof![
        3 => (0.0..0.06f64).prop_map(Some),
        3 => (0.02..0.03f64).prop_map(Some),
        1 => Just(None),
    ];
    prop::collection::vec(sample, 1..200)
}

fn run_pinch(trace: &[Option<f64>]) -> Vec<(u64, IntentKind)> {
    let mut tracker = PinchTracker::new(Handedness::Left, PinchConfig::default(), FrameDuration::SIXTIETH);
    let mut out = Vec::new();
    for (f, d) in trace.iter().enumerate() {
        for e in tracker.update(&hand_at(*d), f as u64).unwrap() {
            out.push((f as u64, e.kind));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn pinch_events_alternate_starting_with_began(trace in distances()) {
        let edges: Vec<IntentKind> = run_pinch(&trace)
            .into_iter()
            .map(|(_, k)| k)
            .filter(|k| matches!(k, IntentKind::PinchBegan | IntentKind::PinchEnded))
            .collect();
        for (i, k) in edges.iter().enumerate() {
            let want = if i % 2 == 0 { IntentKind::PinchBegan } else { IntentKind::PinchEnded };
            prop_assert_eq!(k, &want);
        }
    }

    #[test]
    fn at_most_one_long_pinch_per_pinch(trace in distances()) {
        let mut active = false;
        let mut longs = 0;
        for (_, k) in run_pinch(&trace) {
            match k {
                IntentKind::PinchBegan => {
                    active = true;
                    longs = 0;
                }
                IntentKind::PinchEnded => active = false,
                IntentKind::LongPinch => {
                    prop_assert!(active);
                    longs += 1;
                    prop_assert!(longs <= 1);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn band_never_retriggers(prefix in distances(), band in prop::collection::vec(0.0201..0.0299f64, 1..120)) {
        let config = PinchConfig::default();
        prop_assume!(config.enter < 0.0201 && config.exit > 0.0299);
        let before = run_pinch(&prefix).len();
        let trace: Vec<Option<f64>> = prefix.iter().copied().chain(band.iter().map(|d| Some(*d))).collect();
        let events = run_pinch(&trace);
        // Inside the band only a long pinch from an ongoing hold may appear.
        for (f, k) in &events[before..] {
            prop_assert!(*f as usize >= prefix.len());
            prop_assert_eq!(k, &IntentKind::LongPinch);
        }
    }

    #[test]
    fn output_is_a_function_of_input(trace in distances()) {
        prop_assert_eq!(run_pinch(&trace), run_pinch(&trace));
    }

    #[test]
    fn swipe_thresholds_hold_on_straight_lines(
        angle in 0.0..std::f64::consts::TAU,
        len in 0.0..0.4f64,
        depth in -0.05..0.05f64,
        frames in 2u64..13,
    ) {
        let config = SwipeConfig::default();
        let delta = DVec3::new(angle.cos() * len, angle.sin() * len, depth);
        let start = DVec3::new(0.0, 1.0, -0.3);
        let samples: Vec<(u64, DVec3)> = (0..=frames).map(|k| (k, start + delta * (k as f64 / frames as f64))).collect();
        let (h, v) = (delta.x.abs(), delta.y.abs());
        match recognize_swipe(&samples, &config) {
            Some((dir, _)) => {
                prop_assert!(h.max(v) >= config.min_disp);
                prop_assert!(h.max(v) >= config.dominance * h.min(v));
                let want = match (h >= v, delta.x >= 0.0, delta.y >= 0.0) {
                    (true, true, _) => SwipeDirection::Right,
                    (true, false, _) => SwipeDirection::Left,
                    (false, _, true) => SwipeDirection::Up,
                    (false, _, false) => SwipeDirection::Down,
                };
                prop_assert_eq!(dir, want);
            }
            None => prop_assert!(h.max(v) < config.min_disp || h.max(v) < config.dominance * h.min(v)),
        }
    }
}
