use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::worldmap::ExhibitId;

/// Visit history plus the suggestion currently awaiting an answer.
///
/// An exhibit counts as visited only once the robot has arrived at it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionState {
    visited: Vec<ExhibitId>,
    last_suggested: Option<ExhibitId>,
    pending: Option<ExhibitId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suggestion {
    Exhibit(ExhibitId),
    TourComplete,
}

impl SuggestionState {
    /// Visited exhibits in arrival order.
    pub fn visited(&self) -> &[ExhibitId] {
        &self.visited
    }

    pub fn is_visited(&self, id: ExhibitId) -> bool {
        self.visited.contains(&id)
    }

    /// Records an arrival; false if already visited.
    pub fn mark_visited(&mut self, id: ExhibitId) -> bool {
        if self.pending == Some(id) {
            self.pending = None;
        }
        if self.is_visited(id) {
            return false;
        }
        self.visited.push(id);
        true
    }

    pub fn last_suggested(&self) -> Option<ExhibitId> {
        self.last_suggested
    }

    /// Suggestion still waiting for the visitor's answer.
    pub fn pending(&self) -> Option<ExhibitId> {
        self.pending
    }

    pub fn clear_pending(&mut self) -> Option<ExhibitId> {
        self.pending.take()
    }
}

/// First tour-order exhibit not yet visited; records it as the pending suggestion.
pub fn suggest_next(state: &mut SuggestionState, tour_order: &[ExhibitId]) -> Suggestion {
    match tour_order.iter().copied().find(|id| !state.is_visited(*id)) {
        Some(id) => {
            state.last_suggested = Some(id);
            state.pending = Some(id);
            Suggestion::Exhibit(id)
        }
        None => {
            state.pending = None;
            Suggestion::TourComplete
        }
    }
}
