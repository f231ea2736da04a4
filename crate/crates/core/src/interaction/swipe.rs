use std::collections::VecDeque;

use glam::DVec3;

use super::{SwipeConfig, SwipeDirection};
use crate::model::FrameDuration;

/// Classifies a window of wrist samples as a swipe.
///
/// Displacement is last minus first sample in world X (horizontal) and Y
/// (vertical). The dominant component must reach `min_disp` and exceed the
/// other by `dominance`. Confidence is `min(1, |dominant| / (2 min_disp))`.
pub fn recognize_swipe(samples: &[(u64, DVec3)], config: &SwipeConfig) -> Option<(SwipeDirection, f64)> {
    let (first, last) = (samples.first()?.1, samples.last()?.1);
    let delta = last - first;
    let (h, v) = (delta.x, delta.y);
    let (dominant, other, direction) = if h.abs() >= v.abs() {
        let dir = if h >= 0.0 {
            SwipeDirection::Right
        } else {
            SwipeDirection::Left
        };
        (h.abs(), v.abs(), dir)
    } else {
        let dir = if v >= 0.0 {
            SwipeDirection::Up
        } else {
            SwipeDirection::Down
        };
        (v.abs(), h.abs(), dir)
    };
    if dominant < config.min_disp || dominant < config.dominance * other {
        return None;
    }
    Some((direction, (dominant / (2.0 * config.min_disp)).min(1.0)))
}

/// Sliding-window swipe detector for one hand. After a swipe the window is
/// cleared and the detector stays silent for one window length.
#[derive(Debug, Clone)]
pub struct SwipeTracker {
    config: SwipeConfig,
    window_frames: u64,
    samples: VecDeque<(u64, DVec3)>,
    refractory_until: Option<u64>,
}

impl SwipeTracker {
    pub fn new(config: SwipeConfig, frame_duration: FrameDuration) -> Self {
        Self {
            config,
            window_frames: frame_duration.frames_for(config.window),
            samples: VecDeque::new(),
            refractory_until: None,
        }
    }

    /// Feeds the wrist position for `frame_index`; `None` means untracked.
    pub fn update(&mut self, frame_index: u64, wrist: Option<DVec3>) -> Option<(SwipeDirection, f64)> {
        if let Some(until) = self.refractory_until {
            if frame_index < until {
                return None;
            }
            self.refractory_until = None;
        }
        let Some(wrist) = wrist else {
            self.samples.clear();
            return None;
        };
        self.samples.push_back((frame_index, wrist));
        let oldest = frame_index.saturating_sub(self.window_frames);
        while self.samples.front().is_some_and(|(f, _)| *f < oldest) {
            self.samples.pop_front();
        }
        let window: Vec<_> = self.samples.iter().copied().collect();
        let hit = recognize_swipe(&window, &self.config)?;
        self.samples.clear();
        self.refractory_until = Some(frame_index + self.window_frames);
        Some(hit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(to: DVec3, frames: u64) -> Vec<(u64, DVec3)> {
        (0..=frames).map(|i| (i, to * (i as f64 / frames as f64))).collect()
    }

    #[test]
    fn straight_right_swipe() {
        // 0.2 m in 0.2 s at 60 Hz.
        let (dir, conf) = recognize_swipe(&line(DVec3::new(0.2, 0.0, 0.0), 12), &SwipeConfig::default()).unwrap();
        assert_eq!(dir, SwipeDirection::Right);
        assert!(conf >= 0.66, "{conf}");
    }

    #[test]
    fn diagonal_fails_dominance() {
        assert_eq!(
            recognize_swipe(&line(DVec3::new(0.2, 0.15, 0.0), 12), &SwipeConfig::default()),
            None
        );
    }

    #[test]
    fn short_move_fails_displacement() {
        assert_eq!(
            recognize_swipe(&line(DVec3::new(0.1, 0.0, 0.0), 12), &SwipeConfig::default()),
            None
        );
    }

    #[test]
    fn vertical_directions() {
        let cfg = SwipeConfig::default();
        assert_eq!(
            recognize_swipe(&line(DVec3::new(0.0, -0.3, 0.0), 6), &cfg).unwrap(),
            (SwipeDirection::Down, 1.0)
        );
        assert_eq!(
            recognize_swipe(&line(DVec3::new(0.01, 0.2, 0.0), 6), &cfg).unwrap().0,
            SwipeDirection::Up
        );
        assert_eq!(
            recognize_swipe(&line(DVec3::new(-0.2, 0.0, 0.0), 6), &cfg).unwrap().0,
            SwipeDirection::Left
        );
    }

    #[test]
    fn tracker_fires_once_then_goes_refractory() {
        let mut tracker = SwipeTracker::new(SwipeConfig::default(), FrameDuration::SIXTIETH);
        // Continuous 1.2 m/s motion to the right for one second.
        let fired: Vec<u64> = (0..60u64)
            .filter_map(|f| {
                tracker
                    .update(f, Some(DVec3::new(f as f64 / 50.0, 0.0, 0.0)))
                    .map(|_| f)
            })
            .collect();
        // Fires once 0.15 m of travel is inside the window (frame 8), stays
        // silent for 18 frames, then needs 8 more frames of samples.
        assert_eq!(fired, vec![8, 34]);
    }

    #[test]
    fn window_drops_old_samples() {
        let mut tracker = SwipeTracker::new(SwipeConfig::default(), FrameDuration::SIXTIETH);
        // Slow drift: 0.005 m per frame never covers 0.15 m within 18 frames.
        for f in 0..120u64 {
            assert_eq!(tracker.update(f, Some(DVec3::new(f as f64 * 0.005, 0.0, 0.0))), None);
        }
    }
}
