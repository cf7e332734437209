//! The next-state function: one transition per call, driven by the script flow.
//!
//! A state carries everything its successor needs. Nothing about who has
//! already acted in a betting round is stored; it is recovered from the bets,
//! the phase trace and the player being prompted.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cards::{build_deck, join_cards, sort_canonical, Card, Deck, DeckExhausted};
use crate::evaluator::{self, EvalError, WinnerKind, Winners};
use crate::rng::{fnv1a, SplitMix64};
use crate::script::{GameScript, PhaseKind, ScriptError};

/// Zero-based seat index; shown as `p1`, `p2`, ...
pub type PlayerId = usize;

pub fn player_name(id: PlayerId) -> String {
    format!("p{}", id + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("invalid stacks: {0}")]
    InvalidStacks(String),
    #[error("{} must act before the round can continue", player_name(*.0))]
    InputRequired(PlayerId),
    #[error("no player input is expected in this state")]
    UnexpectedInput,
    #[error("it is {}'s turn, not {}'s", player_name(*expected), player_name(*got))]
    WrongPlayer { expected: PlayerId, got: PlayerId },
    #[error("illegal action: {0}")]
    IllegalAction(String),
    #[error("the round is over")]
    RoundOver,
    #[error(transparent)]
    DeckExhausted(#[from] DeckExhausted),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("round did not finish within {0} transitions")]
    Stalled(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Seat {
    /// Chips committed to the pot this round, cumulative over betting phases.
    pub bet: u64,
    pub stack: u64,
    pub all_in: bool,
    pub folded: bool,
    pub hole: Vec<Card>,
}

impl Seat {
    /// Still able to take betting decisions.
    pub fn active(&self) -> bool {
        !self.folded && !self.all_in
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnKind {
    Bet,
    Switch,
}

/// What the engine last announced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Notice {
    #[default]
    None,
    Turn { player: PlayerId, kind: TurnKind },
    Showdown(Winners),
    /// Chips paid per seat at prize, in seat order.
    Payouts(Vec<(PlayerId, u64)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub seats: Vec<Seat>,
    pub button: PlayerId,
    /// Small and big blind seats, when the flow has a blind phase.
    pub blinds: Option<(PlayerId, PlayerId)>,
    pub deck: Deck,
    /// Burned, folded and switched-out cards, kept in unshuffled-deck order.
    pub discards: Vec<Card>,
    pub community: Vec<Card>,
    /// Completed phases.
    pub trace: Vec<PhaseKind>,
    pub notice: Notice,
}

impl GameState {
    pub fn pot(&self) -> u64 {
        self.seats.iter().map(|s| s.bet).sum()
    }

    pub fn total_chips(&self) -> u64 {
        self.seats.iter().map(|s| s.bet + s.stack).sum()
    }

    pub fn high_bet(&self) -> u64 {
        self.seats.iter().map(|s| s.bet).max().unwrap_or(0)
    }

    pub fn finished(&self) -> bool {
        self.trace.last() == Some(&PhaseKind::Prize)
    }

    pub fn in_hand(&self) -> usize {
        self.seats.iter().filter(|s| !s.folded).count()
    }

    /// Everyone else folded; the next transition pays the survivor.
    pub fn walkover(&self) -> bool {
        self.in_hand() == 1 && !self.finished()
    }

    /// Flow phase that the next transition works on.
    pub fn current_phase(&self, script: &GameScript) -> Option<PhaseKind> {
        if self.finished() {
            return None;
        }
        script.flow.get(self.trace.len()).copied()
    }

    pub fn prompted(&self) -> Option<(PlayerId, TurnKind)> {
        match self.notice {
            Notice::Turn { player, kind } => Some((player, kind)),
            _ => None,
        }
    }

    pub fn showed(&self) -> bool {
        self.trace.contains(&PhaseKind::Show)
    }

    /// Every card, wherever it is.
    pub fn all_cards(&self) -> Vec<Card> {
        let mut out: Vec<Card> = self.deck.cards().to_vec();
        for s in &self.seats {
            out.extend(&s.hole);
        }
        out.extend(&self.community);
        out.extend(&self.discards);
        out
    }

    fn n(&self) -> usize {
        self.seats.len()
    }

    /// Seats in order starting at `from`, wrapping once around the table.
    fn cycle(&self, from: PlayerId) -> impl Iterator<Item = PlayerId> {
        let n = self.n();
        (0..n).map(move |i| (from + i) % n)
    }

    fn discard(&mut self, script: &GameScript, cards: &[Card]) {
        self.discards.extend_from_slice(cards);
        sort_canonical(script, &mut self.discards);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Check,
    Call,
    RaiseTo(u64),
    Fold,
    AllIn,
    Switch(Vec<Card>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerInput {
    pub player: PlayerId,
    pub action: Action,
}

impl PlayerInput {
    pub fn new(player: PlayerId, action: Action) -> Self {
        Self { player, action }
    }
}

/// One kind of move open to the prompted player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LegalAction {
    Check,
    Call { amount: u64 },
    /// Cumulative bet bounds, inclusive.
    RaiseTo { min: u64, max: u64 },
    Fold,
    AllIn,
    Switch { max_cards: usize },
}

impl LegalAction {
    /// Whether `action` falls under this move. Switch only checks the count.
    pub fn permits(&self, action: &Action) -> bool {
        match (self, action) {
            (LegalAction::Check, Action::Check)
            | (LegalAction::Call { .. }, Action::Call)
            | (LegalAction::Fold, Action::Fold)
            | (LegalAction::AllIn, Action::AllIn) => true,
            (LegalAction::RaiseTo { min, max }, Action::RaiseTo(x)) => min <= x && x <= max,
            (LegalAction::Switch { max_cards }, Action::Switch(cards)) => cards.len() <= *max_cards,
            _ => false,
        }
    }
}

/// Default button seat: three seats before the end of the table, so that in a
/// five-handed game the blinds sit on the last two seats. Heads-up it is p2.
pub fn default_button(num_players: usize) -> PlayerId {
    (num_players as isize - 3).rem_euclid(num_players as isize) as usize
}

/// Small and big blind for a button position; heads-up the button posts small.
pub fn blind_seats(num_players: usize, button: PlayerId) -> (PlayerId, PlayerId) {
    if num_players == 2 {
        (button, (button + 1) % 2)
    } else {
        ((button + 1) % num_players, (button + 2) % num_players)
    }
}

pub fn init_round(script: &GameScript, seed: u64, stacks: &[u64]) -> Result<GameState, EngineError> {
    init_round_at(script, seed, stacks, default_button(script.num_players as usize))
}

/// Fresh round with the deck shuffled by `seed`. Runs the start phase.
pub fn init_round_at(
    script: &GameScript,
    seed: u64,
    stacks: &[u64],
    button: PlayerId,
) -> Result<GameState, EngineError> {
    script.validate()?;
    let n = script.num_players as usize;
    if stacks.len() != n {
        return Err(EngineError::InvalidStacks(format!(
            "{} stacks given for {n} players",
            stacks.len()
        )));
    }
    if let Some(i) = stacks.iter().position(|&s| s < script.min_bet) {
        return Err(EngineError::InvalidStacks(format!(
            "{} has fewer chips than the minimum bet",
            player_name(i)
        )));
    }
    if button >= n {
        return Err(EngineError::InvalidStacks(format!("no seat for button {button}")));
    }
    let mut deck = build_deck(script);
    deck.shuffle(&mut SplitMix64::new(seed));
    Ok(GameState {
        seats: stacks
            .iter()
            .map(|&stack| Seat {
                stack,
                ..Seat::default()
            })
            .collect(),
        button,
        blinds: script.has_blinds().then(|| blind_seats(n, button)),
        deck,
        discards: Vec::new(),
        community: Vec::new(),
        trace: vec![PhaseKind::Start],
        notice: Notice::None,
    })
}

fn is_blind_round(state: &GameState) -> bool {
    match state.trace.iter().rposition(|p| *p == PhaseKind::Blind) {
        Some(i) => !state.trace[i + 1..].contains(&PhaseKind::Bet),
        None => false,
    }
}

/// First seat of the betting lap: after the big blind pre-flop, else after the button.
fn lap_start(state: &GameState) -> PlayerId {
    match state.blinds {
        Some((_, bb)) if is_blind_round(state) => (bb + 1) % state.n(),
        _ => (state.button + 1) % state.n(),
    }
}

fn lap_pos(state: &GameState, start: PlayerId, seat: PlayerId) -> usize {
    (seat + state.n() - start) % state.n()
}

fn next_in_lap(state: &GameState, start: PlayerId, after: PlayerId, ok: impl Fn(&Seat) -> bool) -> Option<PlayerId> {
    let from = lap_pos(state, start, after);
    state
        .cycle(start)
        .filter(|&s| lap_pos(state, start, s) > from)
        .find(|&s| ok(&state.seats[s]))
}

fn next_unmatched(state: &GameState, after: PlayerId) -> Option<PlayerId> {
    let high = state.high_bet();
    state
        .cycle(after + 1)
        .take(state.n() - 1)
        .find(|&s| state.seats[s].active() && state.seats[s].bet < high)
}

/// Prompt on entering a betting or switching phase, if anyone can act.
fn entry_prompt(state: &GameState, kind: TurnKind) -> Option<PlayerId> {
    if state.in_hand() <= 1 {
        return None;
    }
    match kind {
        TurnKind::Switch => {
            let start = (state.button + 1) % state.n();
            state.cycle(start).find(|&s| !state.seats[s].folded)
        }
        TurnKind::Bet => {
            let high = state.high_bet();
            let active: Vec<PlayerId> = state
                .cycle(lap_start(state))
                .filter(|&s| state.seats[s].active())
                .collect();
            match active.as_slice() {
                [] => None,
                [only] => (state.seats[*only].bet < high).then_some(*only),
                [first, ..] => Some(*first),
            }
        }
    }
}

/// Sets the prompt for the phase that is about to run, if it is interactive.
fn prepare_turn(state: &mut GameState, script: &GameScript) {
    let kind = match state.current_phase(script) {
        Some(PhaseKind::Bet) => TurnKind::Bet,
        Some(PhaseKind::Switch) => TurnKind::Switch,
        _ => return,
    };
    if let Some(player) = entry_prompt(state, kind) {
        state.notice = Notice::Turn { player, kind };
    }
}

/// Moves open to the prompted player; empty when nobody is prompted.
pub fn legal_actions(state: &GameState, script: &GameScript) -> Vec<LegalAction> {
    let Some((p, kind)) = state.prompted() else {
        return Vec::new();
    };
    let seat = &state.seats[p];
    match kind {
        TurnKind::Switch => vec![LegalAction::Switch {
            max_cards: seat.hole.len().min(state.deck.len()),
        }],
        TurnKind::Bet => {
            let high = state.high_bet();
            let mut out = Vec::new();
            if seat.bet >= high {
                out.push(LegalAction::Check);
            } else {
                out.push(LegalAction::Call {
                    amount: (high - seat.bet).min(seat.stack),
                });
            }
            let min = high + script.min_bet;
            let max = script.max_bet.min(seat.bet + seat.stack);
            if min <= max {
                out.push(LegalAction::RaiseTo { min, max });
            }
            out.push(LegalAction::Fold);
            if script.all_in_allowed() && seat.stack > 0 {
                out.push(LegalAction::AllIn);
            }
            out
        }
    }
}

pub(crate) fn commit(seat: &mut Seat, amount: u64) {
    seat.stack -= amount;
    seat.bet += amount;
    if seat.stack == 0 {
        seat.all_in = true;
    }
}

fn close_phase(state: &mut GameState, script: &GameScript, phase: PhaseKind) {
    state.trace.push(phase);
    state.notice = Notice::None;
    prepare_turn(state, script);
}

fn apply_bet(state: &mut GameState, script: &GameScript, p: PlayerId, action: &Action) {
    let high = state.high_bet();
    let raise_seen = state.seats[p].bet < high && !(is_blind_round(state) && high == script.min_bet);
    {
        let seat = &mut state.seats[p];
        match action {
            Action::Check => {}
            Action::Call => {
                let amount = (high - seat.bet).min(seat.stack);
                commit(seat, amount);
            }
            Action::RaiseTo(x) => {
                let amount = x - seat.bet;
                commit(seat, amount);
            }
            Action::AllIn => {
                let amount = seat.stack;
                commit(seat, amount);
            }
            Action::Fold => {
                seat.folded = true;
            }
            Action::Switch(_) => unreachable!("checked by legal_actions"),
        }
    }
    if matches!(action, Action::Fold) {
        let hole = core::mem::take(&mut state.seats[p].hole);
        state.discard(script, &hole);
    }
    if state.in_hand() == 1 {
        state.notice = Notice::None;
        return;
    }
    let aggressive = state.high_bet() > high;
    let next = if aggressive || raise_seen {
        next_unmatched(state, p)
    } else {
        let start = lap_start(state);
        next_in_lap(state, start, p, Seat::active)
    };
    match next {
        Some(player) => {
            state.notice = Notice::Turn {
                player,
                kind: TurnKind::Bet,
            }
        }
        None => close_phase(state, script, PhaseKind::Bet),
    }
}

fn apply_switch(
    state: &mut GameState,
    script: &GameScript,
    p: PlayerId,
    cards: &[Card],
) -> Result<(), EngineError> {
    for (i, c) in cards.iter().enumerate() {
        if cards[..i].contains(c) {
            return Err(EngineError::IllegalAction(format!("{c} named twice")));
        }
        if !state.seats[p].hole.contains(c) {
            return Err(EngineError::IllegalAction(format!(
                "{} does not hold {c}",
                player_name(p)
            )));
        }
    }
    let mut fresh = state.deck.draw(cards.len())?.into_iter();
    for slot in state.seats[p].hole.iter_mut() {
        if cards.contains(slot) {
            *slot = fresh.next().expect("drew one card per switched card");
        }
    }
    state.discard(script, cards);
    let start = (state.button + 1) % state.n();
    match next_in_lap(state, start, p, |s| !s.folded) {
        Some(player) => {
            state.notice = Notice::Turn {
                player,
                kind: TurnKind::Switch,
            }
        }
        None => close_phase(state, script, PhaseKind::Switch),
    }
    Ok(())
}

fn first_to_deal(state: &GameState) -> PlayerId {
    match state.blinds {
        Some((sb, _)) => sb,
        None => (state.button + 1) % state.n(),
    }
}

fn showdown_winners(state: &GameState, script: &GameScript) -> Result<Winners, EngineError> {
    let hands: Vec<(PlayerId, Vec<Card>)> = state
        .seats
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.folded)
        .map(|(i, s)| (i, s.hole.clone()))
        .collect();
    Ok(evaluator::winners(script, &hands, &state.community)?)
}

/// Splits `amount` evenly over `winners`; the remainder goes to the winner
/// seated earliest after the button.
/// Splits `amount` equally among `winners`; the remainder goes to the winner
/// seated first after the button.
pub fn split_pot(num_players: usize, button: PlayerId, amount: u64, winners: &[PlayerId]) -> Vec<u64> {
    let mut out = vec![0u64; num_players];
    if winners.is_empty() {
        return out;
    }
    let each = amount / winners.len() as u64;
    for &w in winners {
        out[w] += each;
    }
    let rest = amount - each * winners.len() as u64;
    if rest > 0 {
        let first = (1..=num_players)
            .map(|i| (button + i) % num_players)
            .find(|s| winners.contains(s))
            .expect("winner is seated");
        out[first] += rest;
    }
    out
}

fn share(state: &GameState, amount: u64, winners: &[PlayerId], out: &mut [u64]) {
    for (o, a) in out.iter_mut().zip(split_pot(state.n(), state.button, amount, winners)) {
        *o += a;
    }
}

fn pay_out(state: &mut GameState, script: &GameScript) -> Result<(), EngineError> {
    let pot = state.pot();
    let mut paid = vec![0u64; state.n()];
    if state.in_hand() == 1 {
        let survivor = state.seats.iter().position(|s| !s.folded).expect("one seat in hand");
        paid[survivor] = pot;
    } else {
        let w = showdown_winners(state, script)?;
        match w.kind {
            WinnerKind::Single => share(state, pot, &w.primary, &mut paid),
            WinnerKind::HighLow | WinnerKind::LowBadugi => {
                let half = pot / 2;
                share(state, pot - half, &w.primary, &mut paid);
                share(state, half, &w.secondary, &mut paid);
            }
        }
    }
    for (seat, amount) in state.seats.iter_mut().zip(&paid) {
        seat.stack += amount;
        seat.bet = 0;
        seat.all_in = false;
    }
    state.notice = Notice::Payouts(
        paid.iter()
            .enumerate()
            .filter(|(_, a)| **a > 0)
            .map(|(i, a)| (i, *a))
            .collect(),
    );
    state.trace.push(PhaseKind::Prize);
    Ok(())
}

fn auto_step(state: &mut GameState, script: &GameScript) -> Result<(), EngineError> {
    if state.walkover() {
        return pay_out(state, script);
    }
    let phase = state.current_phase(script).ok_or(EngineError::RoundOver)?;
    state.notice = Notice::None;
    match phase {
        PhaseKind::Start => {}
        PhaseKind::Shuffle => {
            let seed = fnv1a(join_cards(state.deck.cards(), "|").as_bytes());
            state.deck.shuffle(&mut SplitMix64::new(seed));
        }
        PhaseKind::Blind => {
            let (sb, bb) = state.blinds.expect("blind phase implies blind seats");
            for (seat, amount) in [(sb, script.min_bet / 2), (bb, script.min_bet)] {
                let s = &mut state.seats[seat];
                let amount = amount.min(s.stack);
                commit(s, amount);
            }
        }
        PhaseKind::Deal(x) => {
            let order: Vec<PlayerId> = state
                .cycle(first_to_deal(state))
                .filter(|&s| !state.seats[s].folded)
                .collect();
            let cards = state.deck.draw(order.len() * x as usize)?;
            for (i, c) in cards.into_iter().enumerate() {
                state.seats[order[i % order.len()]].hole.push(c);
            }
        }
        PhaseKind::Flop(x) => {
            if state.deck.len() < x as usize + 1 {
                return Err(DeckExhausted {
                    requested: x as usize + 1,
                    remaining: state.deck.len(),
                }
                .into());
            }
            let burn = state.deck.draw(1)?;
            state.discard(script, &burn);
            let shown = state.deck.draw(x as usize)?;
            state.community.extend(shown);
        }
        // Reached only when nobody can act; the phase passes unchanged.
        PhaseKind::Bet | PhaseKind::Switch => {}
        PhaseKind::Show => {
            state.notice = Notice::Showdown(showdown_winners(state, script)?);
        }
        PhaseKind::Prize => return pay_out(state, script),
    }
    state.trace.push(phase);
    prepare_turn(state, script);
    Ok(())
}

/// One transition. `input` must be given exactly when a player is prompted.
/// Errors leave `state` untouched.
pub fn next_state(
    state: &GameState,
    input: Option<&PlayerInput>,
    script: &GameScript,
) -> Result<GameState, EngineError> {
    if state.finished() {
        return Err(EngineError::RoundOver);
    }
    let mut next = state.clone();
    match (state.prompted(), input) {
        (Some((expected, _)), None) => return Err(EngineError::InputRequired(expected)),
        (None, Some(_)) => return Err(EngineError::UnexpectedInput),
        (None, None) => auto_step(&mut next, script)?,
        (Some((expected, kind)), Some(input)) => {
            if input.player != expected {
                return Err(EngineError::WrongPlayer {
                    expected,
                    got: input.player,
                });
            }
            let legal = legal_actions(state, script);
            if !legal.iter().any(|l| l.permits(&input.action)) {
                return Err(EngineError::IllegalAction(format!(
                    "{:?} is not allowed for {}",
                    input.action,
                    player_name(expected)
                )));
            }
            match (kind, &input.action) {
                (TurnKind::Switch, Action::Switch(cards)) => apply_switch(&mut next, script, expected, cards)?,
                (TurnKind::Bet, action) => apply_bet(&mut next, script, expected, action),
                _ => unreachable!("legal actions match the turn kind"),
            }
        }
    }
    Ok(next)
}

/// Chooses actions for prompted players.
pub trait Agent {
    fn act(&mut self, state: &GameState, script: &GameScript, legal: &[LegalAction]) -> Action;
}

impl<F> Agent for F
where
    F: FnMut(&GameState, &GameScript, &[LegalAction]) -> Action,
{
    fn act(&mut self, state: &GameState, script: &GameScript, legal: &[LegalAction]) -> Action {
        self(state, script, legal)
    }
}

/// Picks a legal move kind at random, then an amount or a card subset uniformly.
///
/// Every kind has weight 100 except folding, which has `fold_weight`
/// ([`DEFAULT_FOLD_WEIGHT`] unless changed). With uniform folding nine rounds
/// in ten end before the showdown.
pub const DEFAULT_FOLD_WEIGHT: u64 = 15;

#[derive(Debug, Clone)]
pub struct RandomAgent {
    rng: SplitMix64,
    pub fold_weight: u64,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            fold_weight: DEFAULT_FOLD_WEIGHT,
        }
    }

    pub fn with_fold_weight(mut self, percent: u64) -> Self {
        self.fold_weight = percent;
        self
    }
}

impl Agent for RandomAgent {
    fn act(&mut self, state: &GameState, _script: &GameScript, legal: &[LegalAction]) -> Action {
        let weight = |l: &LegalAction| match l {
            LegalAction::Fold => self.fold_weight,
            _ => 100,
        };
        let total: u64 = legal.iter().map(weight).sum();
        let mut pick = self.rng.below(total.max(1));
        let mut chosen = &legal[0];
        for l in legal {
            let w = weight(l);
            if pick < w {
                chosen = l;
                break;
            }
            pick -= w;
        }
        match chosen {
            LegalAction::Check => Action::Check,
            LegalAction::Call { .. } => Action::Call,
            LegalAction::RaiseTo { min, max } => Action::RaiseTo(self.rng.range_inclusive(*min, *max)),
            LegalAction::Fold => Action::Fold,
            LegalAction::AllIn => Action::AllIn,
            LegalAction::Switch { max_cards } => {
                let (p, _) = state.prompted().expect("switch needs a prompt");
                let mut hole = state.seats[p].hole.clone();
                let k = self.rng.below(*max_cards as u64 + 1) as usize;
                self.rng.shuffle(&mut hole);
                hole.truncate(k);
                Action::Switch(hole)
            }
        }
    }
}

/// States `s_0..s_T` and the input consumed by each transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub states: Vec<GameState>,
    /// `inputs[i]` leads from `states[i]` to `states[i + 1]`.
    pub inputs: Vec<Option<PlayerInput>>,
}

pub const MAX_TRANSITIONS: usize = 10_000;

/// Plays one round to the prize, asking `agents[p]` whenever `p` is prompted.
pub fn run_round(
    script: &GameScript,
    seed: u64,
    stacks: &[u64],
    agents: &mut [Box<dyn Agent + '_>],
) -> Result<Round, EngineError> {
    let first = init_round(script, seed, stacks)?;
    play_from(first, script, agents)
}

pub fn play_from(
    first: GameState,
    script: &GameScript,
    agents: &mut [Box<dyn Agent + '_>],
) -> Result<Round, EngineError> {
    let mut states = vec![first];
    let mut inputs = Vec::new();
    while !states.last().expect("non-empty").finished() {
        if inputs.len() >= MAX_TRANSITIONS {
            return Err(EngineError::Stalled(MAX_TRANSITIONS));
        }
        let state = states.last().expect("non-empty");
        let input = state.prompted().map(|(p, _)| {
            let legal = legal_actions(state, script);
            PlayerInput::new(p, agents[p].act(state, script, &legal))
        });
        let next = next_state(state, input.as_ref(), script)?;
        inputs.push(input);
        states.push(next);
    }
    Ok(Round { states, inputs })
}

/// Agents for every seat, each seeded from `seed`.
pub fn random_agents(script: &GameScript, seed: u64) -> Vec<Box<dyn Agent>> {
    let mut rng = SplitMix64::new(seed ^ 0xA5A5_A5A5_A5A5_A5A5);
    (0..script.num_players as u64)
        .map(|i| Box::new(RandomAgent::new(rng.fork(i).next_u64())) as Box<dyn Agent>)
        .collect()
}

/// A round between random agents with equal stacks.
pub fn random_round(script: &GameScript, seed: u64, stack: u64) -> Result<Round, EngineError> {
    let stacks = vec![stack; script.num_players as usize];
    let mut agents = random_agents(script, seed);
    run_round(script, seed, &stacks, &mut agents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_script;

    fn holdem(players: u8) -> GameScript {
        parse_script(&format!(
            "Number of players: {players}\nSuit: H, D, C, S\nCard Rank: 2<3<4<5<6<7<8<9<10<11<12<13<1\n\
             Hand Rank: High Card<Pair<Two Pair<Three of a Kind<Straight<Flush<Full House<Four of a Kind<Straight Flush\n\
             Min / Max bet: 10 / 1000\nFlow: start->blind->deal2->bet->flop3->bet->flop1->bet->flop1->bet->show->prize\n"
        ))
        .unwrap()
    }

    fn step(s: &GameState, script: &GameScript) -> GameState {
        next_state(s, None, script).unwrap()
    }

    fn act(s: &GameState, script: &GameScript, p: PlayerId, a: Action) -> GameState {
        next_state(s, Some(&PlayerInput::new(p, a)), script).unwrap()
    }

    #[test]
    fn button_positions() {
        assert_eq!(default_button(5), 2);
        assert_eq!(default_button(2), 1);
        assert_eq!(blind_seats(5, 2), (3, 4));
        assert_eq!(blind_seats(2, 1), (1, 0));
    }

    #[test]
    fn blinds_then_first_prompt() {
        let script = holdem(5);
        let s0 = init_round(&script, 1, &[1000; 5]).unwrap();
        let s1 = step(&s0, &script);
        assert_eq!(s1.seats[3].bet, 5);
        assert_eq!(s1.seats[4].bet, 10);
        let s2 = step(&s1, &script);
        assert!(s2.seats.iter().all(|s| s.hole.len() == 2));
        assert_eq!(s2.prompted(), Some((0, TurnKind::Bet)));
    }

    #[test]
    fn limped_blind_round_gives_big_blind_the_option() {
        let script = holdem(3);
        // button p1, blinds p2/p3; p1 acts first.
        let mut s = step(&step(&init_round(&script, 2, &[1000; 3]).unwrap(), &script), &script);
        assert_eq!(s.prompted(), Some((0, TurnKind::Bet)));
        s = act(&s, &script, 0, Action::Call);
        assert_eq!(s.prompted(), Some((1, TurnKind::Bet)));
        s = act(&s, &script, 1, Action::Call);
        assert_eq!(s.prompted(), Some((2, TurnKind::Bet)));
        s = act(&s, &script, 2, Action::Check);
        assert_eq!(s.trace.last(), Some(&PhaseKind::Bet));
        assert_eq!(s.prompted(), None);
        assert_eq!(s.pot(), 30);
    }

    #[test]
    fn raise_reopens_action() {
        let script = holdem(3);
        let mut s = step(&step(&init_round(&script, 2, &[1000; 3]).unwrap(), &script), &script);
        s = act(&s, &script, 0, Action::Call);
        s = act(&s, &script, 1, Action::RaiseTo(40));
        assert_eq!(s.prompted(), Some((2, TurnKind::Bet)));
        s = act(&s, &script, 2, Action::Call);
        assert_eq!(s.prompted(), Some((0, TurnKind::Bet)));
        s = act(&s, &script, 0, Action::Call);
        assert_eq!(s.trace.last(), Some(&PhaseKind::Bet));
    }

    #[test]
    fn illegal_actions_are_rejected_without_change() {
        let script = holdem(3);
        let s = step(&step(&init_round(&script, 2, &[1000; 3]).unwrap(), &script), &script);
        let check = PlayerInput::new(0, Action::Check);
        assert!(matches!(next_state(&s, Some(&check), &script), Err(EngineError::IllegalAction(_))));
        let wrong = PlayerInput::new(1, Action::Call);
        assert_eq!(
            next_state(&s, Some(&wrong), &script),
            Err(EngineError::WrongPlayer { expected: 0, got: 1 })
        );
        let low = PlayerInput::new(0, Action::RaiseTo(15));
        assert!(next_state(&s, Some(&low), &script).is_err());
        assert_eq!(next_state(&s, None, &script), Err(EngineError::InputRequired(0)));
    }

    #[test]
    fn everyone_folds_to_big_blind() {
        let script = holdem(3);
        let mut s = step(&step(&init_round(&script, 4, &[1000; 3]).unwrap(), &script), &script);
        s = act(&s, &script, 0, Action::Fold);
        s = act(&s, &script, 1, Action::Fold);
        assert!(s.walkover());
        s = step(&s, &script);
        assert!(s.finished());
        assert_eq!(s.seats[2].stack, 1005);
        assert_eq!(s.notice, Notice::Payouts(vec![(2, 15)]));
        assert_eq!(s.total_chips(), 3000);
    }

    #[test]
    fn random_rounds_conserve_chips_and_cards() {
        let script = holdem(4);
        for seed in 0..30 {
            let round = random_round(&script, seed, 1000).unwrap();
            for s in &round.states {
                assert_eq!(s.total_chips(), 4000);
                let mut all = s.all_cards();
                all.sort();
                all.dedup();
                assert_eq!(all.len(), 52);
                assert_eq!(s.all_cards().len(), 52);
            }
            assert!(round.states.last().unwrap().finished());
        }
    }

    #[test]
    fn same_seed_same_round() {
        let script = holdem(5);
        assert_eq!(random_round(&script, 9, 1000), random_round(&script, 9, 1000));
    }
}
