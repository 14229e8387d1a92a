use serde::{Deserialize, Serialize};

use crate::forcemodel::Zone;

use super::{Mode, TrialLog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TouchEnter,
    TouchExit,
    SnapEnter,
    SnapExit,
    Select,
    BrushStart,
    BrushEnd,
    EraseStart,
    EraseEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub frame: usize,
    pub t: f64,
    pub kind: EventKind,
}

/// Boundary crossings of the touch and snap flags and edges of the buttons.
///
/// Touch events are omitted for `no_haptic` logs. Strokes still open at the
/// end of the log are closed on the last frame.
pub fn detect_events(log: &TrialLog) -> Vec<Event> {
    let with_touch = log.header.mode != Mode::NoHaptic;
    let mut events = Vec::new();
    let mut prev = (false, false, false, false, false);
    for (i, f) in log.frames.iter().enumerate() {
        let cur = (
            f.touching && with_touch,
            f.zone != Zone::NoSnap,
            f.select,
            f.brush,
            f.erase,
        );
        let mut push = |kind| {
            events.push(Event {
                frame: i,
                t: f.t,
                kind,
            })
        };
        if cur.0 != prev.0 {
            push(if cur.0 {
                EventKind::TouchEnter
            } else {
                EventKind::TouchExit
            });
        }
        if cur.1 != prev.1 {
            push(if cur.1 {
                EventKind::SnapEnter
            } else {
                EventKind::SnapExit
            });
        }
        if cur.2 && !prev.2 {
            push(EventKind::Select);
        }
        if cur.3 != prev.3 {
            push(if cur.3 {
                EventKind::BrushStart
            } else {
                EventKind::BrushEnd
            });
        }
        if cur.4 != prev.4 {
            push(if cur.4 {
                EventKind::EraseStart
            } else {
                EventKind::EraseEnd
            });
        }
        prev = cur;
    }
    if let Some(last) = log.frames.len().checked_sub(1) {
        let t = log.frames[last].t;
        if prev.3 {
            events.push(Event {
                frame: last,
                t,
                kind: EventKind::BrushEnd,
            });
        }
        if prev.4 {
            events.push(Event {
                frame: last,
                t,
                kind: EventKind::EraseEnd,
            });
        }
    }
    events
}

/// Number of touch-enter events.
pub fn touch_count(events: &[Event]) -> usize {
    events
        .iter()
        .filter(|e| e.kind == EventKind::TouchEnter)
        .count()
}
