use super::FeatureVector;
use crate::ingest::GazeEvent;

pub const SUBJECTIVE_NAMES: [&str; 2] = ["avg_move_dist", "horizontal_mobility"];

/// Mean distance between consecutive gaze points and the horizontal share
/// of the scanpath length. Fewer than two events leaves both missing.
pub fn gaze_subjective(events: &[GazeEvent]) -> FeatureVector {
    if events.len() < 2 {
        return FeatureVector::missing(SUBJECTIVE_NAMES.map(String::from).to_vec());
    }
    let mut path = 0.0;
    let mut horizontal = 0.0;
    for pair in events.windows(2) {
        let dx = pair[1].x - pair[0].x;
        let dy = pair[1].y - pair[0].y;
        path += dx.hypot(dy);
        horizontal += dx.abs();
    }
    let mobility = if path > 0.0 {
        (horizontal / path).min(1.0)
    } else {
        0.0
    };
    FeatureVector::from_pairs([
        (
            SUBJECTIVE_NAMES[0].to_string(),
            Some(path / (events.len() - 1) as f64),
        ),
        (SUBJECTIVE_NAMES[1].to_string(), Some(mobility)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GazeEventType;
    use proptest::prelude::*;

    fn gaze(points: &[(f64, f64)]) -> Vec<GazeEvent> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| GazeEvent {
                timestamp: i as i64 * 100,
                event_type: GazeEventType::Fixation,
                x,
                y,
            })
            .collect()
    }

    #[test]
    fn three_four_five() {
        let fv = gaze_subjective(&gaze(&[(0.0, 0.0), (3.0, 4.0)]));
        assert_eq!(fv.values, vec![Some(5.0), Some(0.6)]);
    }

    #[test]
    fn horizontal_scanpath() {
        let fv = gaze_subjective(&gaze(&[(0.0, 5.0), (10.0, 5.0), (4.0, 5.0)]));
        assert_eq!(fv.values[1], Some(1.0));
    }

    #[test]
    fn single_event_is_missing() {
        let fv = gaze_subjective(&gaze(&[(1.0, 1.0)]));
        assert_eq!(fv.values, vec![None, None]);
        assert_eq!(fv.names.len(), 2);
    }

    #[test]
    fn stationary_gaze_has_zero_mobility() {
        let fv = gaze_subjective(&gaze(&[(1.0, 1.0), (1.0, 1.0)]));
        assert_eq!(fv.values, vec![Some(0.0), Some(0.0)]);
    }

    proptest! {
        #[test]
        fn bounds(points in proptest::collection::vec((-2e3f64..2e3, -2e3f64..2e3), 2..50)) {
            let fv = gaze_subjective(&gaze(&points));
            let dist = fv.values[0].unwrap();
            let mobility = fv.values[1].unwrap();
            prop_assert!(dist >= 0.0);
            prop_assert!((0.0..=1.0).contains(&mobility));
        }
    }
}
