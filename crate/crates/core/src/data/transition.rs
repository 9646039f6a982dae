use super::{AttrId, NormalizationStats, SessionLog};

/// One step of logged experience: the `k` attributes before `a_n`, the
/// attribute actually browsed, its normalized dwell, and the shifted window.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<AttrId>,
    pub action: AttrId,
    pub reward: f64,
    pub next: Vec<AttrId>,
    pub terminal: bool,
    /// Only meaningful when `terminal`.
    pub purchased: bool,
}

/// One transition per `n` in `k..=N`. Sessions with fewer than `k + 1`
/// events yield nothing.
pub fn sessions_to_transitions(
    session: &SessionLog,
    k: usize,
    stats: &NormalizationStats,
) -> Vec<Transition> {
    assert!(k >= 1, "window length must be at least 1");
    if !session.is_usable(k) {
        return Vec::new();
    }
    let attrs: Vec<AttrId> = session.attributes().collect();
    let last = session.last_index();
    (k..=last)
        .map(|n| Transition {
            state: attrs[n - k..n].to_vec(),
            action: attrs[n],
            reward: stats.normalize(session.events[n].dwell),
            next: attrs[n + 1 - k..=n].to_vec(),
            terminal: n == last,
            purchased: session.purchased,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const STATS: NormalizationStats = NormalizationStats { cap: 100.0, percentile: 95.0 };

    fn session(attrs: &[usize], purchased: bool) -> SessionLog {
        let pairs: Vec<_> = attrs.iter().map(|&a| (a, 10.0 * a as f64)).collect();
        SessionLog::from_pairs("s", &pairs, purchased).unwrap()
    }

    #[test]
    fn too_short_yields_nothing() {
        assert!(sessions_to_transitions(&session(&[1, 2, 3, 4], true), 4, &STATS).is_empty());
        assert!(sessions_to_transitions(&session(&[1], true), 1, &STATS).is_empty());
    }

    #[test]
    fn minimal_session_yields_one_terminal() {
        let t = sessions_to_transitions(&session(&[1, 2, 3, 4, 5], true), 4, &STATS);
        assert_eq!(t.len(), 1);
        assert!(t[0].terminal && t[0].purchased);
        assert_eq!(t[0].reward, 0.5);
    }

    #[test]
    fn hand_rolled_windows() {
        let t = sessions_to_transitions(&session(&[1, 2, 3, 4, 5, 6], false), 4, &STATS);
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].state.as_slice(), t[0].action), (&[1, 2, 3, 4][..], 5));
        assert_eq!(t[0].next, vec![2, 3, 4, 5]);
        assert!(!t[0].terminal);
        assert_eq!((t[1].state.as_slice(), t[1].action), (&[2, 3, 4, 5][..], 6));
        assert_eq!(t[1].next, vec![3, 4, 5, 6]);
        assert!(t[1].terminal && !t[1].purchased);
    }

    proptest! {
        #[test]
        fn counts_and_rolling_overlap(attrs in prop::collection::vec(0usize..20, 1..30), k in 1usize..6) {
            let s = session(&attrs, true);
            let t = sessions_to_transitions(&s, k, &STATS);
            let n = attrs.len() - 1;
            if n >= k {
                prop_assert_eq!(t.len(), n - k + 1);
                prop_assert_eq!(t.iter().filter(|x| x.terminal).count(), 1);
                prop_assert!(t.last().unwrap().terminal);
            } else {
                prop_assert!(t.is_empty());
            }
            for pair in t.windows(2) {
                prop_assert_eq!(&pair[0].next, &pair[1].state);
            }
            for x in &t {
                prop_assert_eq!(x.state.len(), k);
                prop_assert_eq!(x.next.len(), k);
                prop_assert_eq!(*x.next.last().unwrap(), x.action);
            }
        }
    }
}
