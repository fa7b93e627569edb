//! Open Jackson-type networks of single-server FIFO stations.
//!
//! A customer's driving variable is the route it would follow through an
//! otherwise empty network: its entry station and, per station, the list
//! of (service time, next hop) pairs it would consume there. Inside a
//! window these lists are stacked per station in customer order and the
//! network consumes them station by station. This station-indexed view
//! is what makes the network monotone and separable; attaching services
//! to customers instead is not monotone under FIFO.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{ArrivalSpec, HeavyTailDist};
use crate::kernel::{ModelError, NetworkKernel};
use crate::window::RealizedWindow;

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;
const ROW_TOL: f64 = 1e-9;

/// One service at a station and where the customer goes afterwards
/// (`None` means it leaves the network).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub service: f64,
    pub next: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacksonCustomer {
    pub entry: usize,
    /// `blocks[j]` lists the visits to station `j` in order.
    pub blocks: Vec<Vec<Visit>>,
}

impl JacksonCustomer {
    /// `nu^(j)`: number of visits per station.
    pub fn visit_counts(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// `Y^(j)`: total service requested per station.
    pub fn workloads(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.iter().map(|v| v.service).sum()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    Start,
    Departure,
    Exit,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::Start => "start",
            EventKind::Departure => "departure",
            EventKind::Exit => "exit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub epoch: f64,
    pub kind: EventKind,
    pub station: usize,
    pub customer: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jackson {
    services: Vec<HeavyTailDist>,
    routing: Vec<Vec<f64>>,
    entry: Vec<f64>,
    arrivals: ArrivalSpec,
    event_cap: u64,
    visits: Vec<f64>,
}

/// Index drawn by inverse transform; a row with a single positive entry
/// consumes no randomness.
fn categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let mut positive = probs.iter().enumerate().filter(|(_, p)| **p > 0.0);
    let first = positive.next().map(|(i, _)| i).unwrap_or(0);
    if positive.next().is_none() {
        return first;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = first;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

impl Jackson {
    /// `routing[i]` has `r + 1` entries: moves to stations `0..r`, then exit.
    pub fn new(
        services: Vec<HeavyTailDist>,
        routing: Vec<Vec<f64>>,
        entry: Vec<f64>,
        arrivals: ArrivalSpec,
        event_cap: u64,
    ) -> Result<Self, ModelError> {
        arrivals.validate()?;
        let r = services.len();
        if r == 0 {
            return Err(ModelError::InvalidModel("network needs at least one station".into()));
        }
        if routing.len() != r || routing.iter().any(|row| row.len() != r + 1) {
            return Err(ModelError::InvalidModel(format!("routing must be {r} rows of {} entries", r + 1)));
        }
        if entry.len() != r {
            return Err(ModelError::InvalidModel(format!("entry distribution must have {r} entries")));
        }
        let bad_row = |row: &[f64]| {
            row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL
        };
        if let Some(i) = routing.iter().position(|row| bad_row(row)) {
            return Err(ModelError::InvalidModel(format!("routing row {i} is not a probability vector")));
        }
        if bad_row(&entry) {
            return Err(ModelError::InvalidModel("entry distribution is not a probability vector".into()));
        }
        if event_cap == 0 {
            return Err(ModelError::InvalidModel("event cap must be positive".into()));
        }
        // A substochastic matrix has spectral radius < 1 exactly when every
        // station can reach one that leaks to the exit.
        let mut drains = vec![false; r];
        for (i, row) in routing.iter().enumerate() {
            drains[i] = row[r] > 0.0;
        }
        loop {
            let mut changed = false;
            for i in 0..r {
                if !drains[i] && (0..r).any(|j| routing[i][j] > 0.0 && drains[j]) {
                    drains[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if let Some(i) = drains.iter().position(|d| !d) {
            return Err(ModelError::InvalidModel(format!(
                "routing spectral radius is not below 1: station {i} never reaches the exit"
            )));
        }
        // pi (I - P) = entry
        let a = DMatrix::from_fn(r, r, |i, j| f64::from(u8::from(i == j)) - routing[j][i]);
        let b = DVector::from_column_slice(&entry);
        let visits = a
            .lu()
            .solve(&b)
            .ok_or_else(|| ModelError::InvalidModel("visit equation is singular".into()))?;
        Ok(Jackson { services, routing, entry, arrivals, event_cap, visits: visits.iter().copied().collect() })
    }

    pub fn services(&self) -> &[HeavyTailDist] {
        &self.services
    }

    pub fn routing(&self) -> &[Vec<f64>] {
        &self.routing
    }

    pub fn entry(&self) -> &[f64] {
        &self.entry
    }

    pub fn event_cap(&self) -> u64 {
        self.event_cap
    }

    /// `pi^(j)`: expected number of visits to each station.
    pub fn expected_visits(&self) -> &[f64] {
        &self.visits
    }

    /// Runs the window through the network; returns `Z` and, if asked,
    /// the event log.
    pub fn simulate(
        &self,
        window: &RealizedWindow<JacksonCustomer>,
        mut log: Option<&mut Vec<Event>>,
    ) -> Result<f64, ModelError> {
        let r = self.services.len();
        let customers = window.driving();
        for c in customers {
            if c.blocks.len() != r || c.entry >= r {
                return Err(ModelError::ShapeMismatch(format!(
                    "customer route has {} station blocks, network has {r}",
                    c.blocks.len()
                )));
            }
        }
        let stacks: Vec<Vec<Visit>> =
            (0..r).map(|k| customers.iter().flat_map(|c| c.blocks[k].iter().copied()).collect()).collect();
        let mut top = vec![0usize; r];
        let rel = window.relative_epochs();
        let base = window.last_epoch();
        let first = window.first();

        let mut heap = BinaryHeap::with_capacity(customers.len() * 2);
        for (c, (t, cust)) in rel.iter().zip(customers).enumerate() {
            heap.push(Pending { time: *t, station: cust.entry, customer: c, departure: false });
        }
        let mut busy: Vec<Option<Option<usize>>> = vec![None; r];
        let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); r];
        let mut last = f64::NEG_INFINITY;
        let mut events = 0u64;
        let record = |log: &mut Option<&mut Vec<Event>>, t: f64, kind, station, customer: usize| {
            if let Some(l) = log.as_deref_mut() {
                l.push(Event { epoch: base + t, kind, station, customer: first + customer as i64 });
            }
        };

        while let Some(ev) = heap.pop() {
            events += 1;
            if events > self.event_cap {
                return Err(ModelError::EventCapExceeded(self.event_cap));
            }
            let k = ev.station;
            if ev.departure {
                record(&mut log, ev.time, EventKind::Departure, k, ev.customer);
                let next = busy[k].take().flatten();
                match next {
                    Some(j) => heap.push(Pending { time: ev.time, station: j, customer: ev.customer, departure: false }),
                    None => {
                        record(&mut log, ev.time, EventKind::Exit, k, ev.customer);
                        last = last.max(ev.time);
                    }
                }
                if let Some(c) = queues[k].pop_front() {
                    let visit = self.pop_stack(&stacks, &mut top, k)?;
                    record(&mut log, ev.time, EventKind::Start, k, c);
                    busy[k] = Some(visit.next);
                    heap.push(Pending { time: ev.time + visit.service, station: k, customer: c, departure: true });
                }
            } else {
                record(&mut log, ev.time, EventKind::Arrival, k, ev.customer);
                if busy[k].is_some() {
                    queues[k].push_back(ev.customer);
                } else {
                    let visit = self.pop_stack(&stacks, &mut top, k)?;
                    record(&mut log, ev.time, EventKind::Start, k, ev.customer);
                    busy[k] = Some(visit.next);
                    heap.push(Pending {
                        time: ev.time + visit.service,
                        station: k,
                        customer: ev.customer,
                        departure: true,
                    });
                }
            }
        }
        Ok(last)
    }

    fn pop_stack(&self, stacks: &[Vec<Visit>], top: &mut [usize], k: usize) -> Result<Visit, ModelError> {
        let v = stacks[k]
            .get(top[k])
            .copied()
            .ok_or_else(|| ModelError::ShapeMismatch(format!("station {k} ran out of service requirements")))?;
        top[k] += 1;
        Ok(v)
    }
}

/// Heap entry ordered by `(epoch, station, customer)`, earliest first.
#[derive(Debug, Clone, Copy)]
struct Pending {
    time: f64,
    station: usize,
    customer: usize,
    departure: bool,
}

impl Pending {
    fn key(&self) -> (usize, usize, bool) {
        (self.station, self.customer, !self.departure)
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other.time.total_cmp(&self.time).then_with(|| other.key().cmp(&self.key()))
    }
}

/// Route of one customer through an otherwise empty network.
pub fn jackson_single_customer<R: Rng + ?Sized>(
    network: &Jackson,
    rng: &mut R,
) -> Result<JacksonCustomer, ModelError> {
    network.sample_driving(rng)
}

impl NetworkKernel for Jackson {
    type Driving = JacksonCustomer;

    fn name(&self) -> &'static str {
        "jackson"
    }

    fn arrivals(&self) -> &ArrivalSpec {
        &self.arrivals
    }

    fn with_arrivals(&self, arrivals: ArrivalSpec) -> Self {
        Jackson { arrivals, ..self.clone() }
    }

    fn has_aa(&self) -> bool {
        true
    }

    fn stations(&self) -> usize {
        self.services.len()
    }

    fn sample_driving<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<JacksonCustomer, ModelError> {
        let r = self.services.len();
        let entry = categorical(&self.entry, rng);
        let mut blocks = vec![Vec::new(); r];
        let mut at = entry;
        let mut steps = 0u64;
        loop {
            steps += 1;
            if steps > self.event_cap {
                return Err(ModelError::EventCapExceeded(self.event_cap));
            }
            let service = self.services[at].sample(rng);
            let dest = categorical(&self.routing[at], rng);
            let next = (dest < r).then_some(dest);
            blocks[at].push(Visit { service, next });
            match next {
                Some(j) => at = j,
                None => break,
            }
        }
        Ok(JacksonCustomer { entry, blocks })
    }

    fn maximal_dater(&self, window: &RealizedWindow<JacksonCustomer>) -> Result<f64, ModelError> {
        self.simulate(window, None)
    }

    fn components(&self, driving: &JacksonCustomer) -> Option<Vec<f64>> {
        Some(driving.workloads())
    }

    fn jump_variables(&self, driving: &JacksonCustomer) -> Vec<f64> {
        driving.workloads()
    }

    fn gamma0_reference(&self) -> Option<f64> {
        self.visits
            .iter()
            .zip(&self.services)
            .map(|(p, s)| p * s.mean())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }
}
