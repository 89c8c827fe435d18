//! Bit-exact accounting of what the parties send, and per-trial outcomes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    OneToTwo,
    TwoToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Hash,
    Ack,
    Nack,
    IndexJ,
    Coin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub round: usize,
    pub direction: Direction,
    pub bits: usize,
    pub kind: MessageKind,
}

/// Declared failure of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCause {
    /// The inputs fell outside the sliced range of the density.
    Tail,
    MultipleMatch,
    NoMatch,
    BudgetExceeded,
    #[serde(rename = "bad_J")]
    BadJ,
}

impl ErrorCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCause::Tail => "tail",
            ErrorCause::MultipleMatch => "multiple_match",
            ErrorCause::NoMatch => "no_match",
            ErrorCause::BudgetExceeded => "budget_exceeded",
            ErrorCause::BadJ => "bad_J",
        }
    }
}

/// Sending would exceed the communication budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverBudget;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChannelLog {
    pub messages: Vec<Message>,
    pub total_bits: usize,
    #[serde(skip)]
    budget: Option<usize>,
}

impl ChannelLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_budget(budget: usize) -> Self {
        Self { budget: Some(budget), ..Self::default() }
    }

    /// Records a message, refusing it if it would overrun the budget.
    pub fn send(&mut self, round: usize, direction: Direction, bits: usize, kind: MessageKind) -> Result<(), OverBudget> {
        if bits == 0 {
            return Ok(());
        }
        if let Some(b) = self.budget {
            if self.total_bits + bits > b {
                return Err(OverBudget);
            }
        }
        self.total_bits += bits;
        self.messages.push(Message { round, direction, bits, kind });
        Ok(())
    }
}

/// One simulated run: the parties' transcript estimates (`None` for ⊥), the
/// inputs, the cost and any declared error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub tau_x: Option<usize>,
    pub tau_y: Option<usize>,
    pub x: usize,
    pub y: usize,
    pub bits: usize,
    pub error: Option<ErrorCause>,
    pub rounds_completed: usize,
    /// Slice in which the (last) hash exchange ended.
    pub slice: Option<usize>,
    /// Slice index `J` sent by the transmitter (last round that sent one).
    pub j: Option<usize>,
    pub log: ChannelLog,
}

impl SimOutcome {
    /// Whether both parties output the same transcript.
    pub fn agrees(&self) -> bool {
        self.tau_x.is_some() && self.tau_x == self.tau_y
    }

    pub fn view(&self) -> crate::protocol::ViewKey {
        crate::protocol::ViewKey { tau_x: self.tau_x, tau_y: self.tau_y, x: self.x, y: self.y }
    }
}
