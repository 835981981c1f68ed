/// Consecutive missed detections after which the tracker drops the object.
pub const DEFAULT_K_TRACK: u32 = 9;
/// Further consecutive misses after track loss that end in a collision.
pub const DEFAULT_K_CRASH: u32 = 5;

/// Frame indices at which a stopped-car-ahead collision occurs.
///
/// A collision fires on the frame where a run of consecutive hazardous
/// misses reaches `k_track + k_crash`; the run counter then restarts, so
/// events never overlap.
pub fn detect_crashes(hazard: &[bool], k_track: u32, k_crash: u32) -> Vec<usize> {
    let limit = (k_track + k_crash) as usize;
    let mut run = 0;
    let mut out = Vec::new();
    for (i, &h) in hazard.iter().enumerate() {
        if h {
            run += 1;
            if run == limit {
                out.push(i);
                run = 0;
            }
        } else {
            run = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_of(n: usize) -> Vec<bool> {
        let mut v = vec![false];
        v.extend(std::iter::repeat_n(true, n));
        v.push(false);
        v
    }

    #[test]
    fn thresholds() {
        assert!(detect_crashes(&run_of(13), 9, 5).is_empty());
        assert_eq!(detect_crashes(&run_of(14), 9, 5), vec![14]);
        assert_eq!(detect_crashes(&run_of(28), 9, 5), vec![14, 28]);
        assert_eq!(detect_crashes(&run_of(27), 9, 5), vec![14]);
    }

    #[test]
    fn interrupted_runs_do_not_accumulate() {
        let mut v = vec![true; 10];
        v.push(false);
        v.extend([true; 10]);
        assert!(detect_crashes(&v, 9, 5).is_empty());
    }
}
