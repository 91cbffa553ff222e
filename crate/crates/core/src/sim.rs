//! Byte-level execution of the caching protocol driven by an array:
//! placement, XOR broadcast delivery, per-user decoding and rate measurement.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::array::{Dpda, Entry};
use crate::bounds::Rational;

pub const DEFAULT_PACKET_SIZE: usize = 64;

/// Packet `packet` of block `block` of file `file`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PacketId {
    pub file: usize,
    pub block: usize,
    pub packet: usize,
}

impl PacketId {
    pub fn new(file: usize, block: usize, packet: usize) -> Self {
        PacketId {
            file,
            block,
            packet,
        }
    }
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{}][{},{}]", self.file, self.block, self.packet)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("library has F={lib} packets per block but the array has F={array}")]
    PacketCount { lib: usize, array: usize },
    #[error("L={l} is smaller than L'={lp}")]
    Blocks { l: usize, lp: usize },
    #[error("demand vectors must have length K={k}, got {d} and {b}")]
    DemandLength { k: usize, d: usize, b: usize },
    #[error("user {user} requests file {file}, but N={n}")]
    DemandFile { user: usize, file: usize, n: usize },
    #[error("user {user} starts at block {start}, but the last valid start is {max}")]
    DemandStart {
        user: usize,
        start: usize,
        max: usize,
    },
    #[error("malformed demand literal {0:?}; expected `d0,d1,...;b0,b1,...`")]
    DemandSyntax(String),
    #[error("slot {slot}: sender {sender} does not cache {packet} (row {row}, column {col})")]
    SenderMissing {
        slot: usize,
        sender: usize,
        packet: PacketId,
        row: usize,
        col: usize,
    },
    #[error("user {user} cannot recover {packet}: {reason}")]
    Unrecoverable {
        user: usize,
        packet: PacketId,
        reason: String,
    },
    #[error("N, L, F and packet size must all be at least 1")]
    ZeroParameter,
}

/// Deterministic file corpus: byte `o` of packet `(i, l, h)` is
/// `(31·i + 17·l + 7·h + o) mod 256`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    n: usize,
    l: usize,
    f: usize,
    packet_size: usize,
    data: Vec<u8>,
}

pub fn make_library(n: usize, l: usize, f: usize, packet_size: usize) -> Result<Library, SimError> {
    if n == 0 || l == 0 || f == 0 || packet_size == 0 {
        return Err(SimError::ZeroParameter);
    }
    let mut data = Vec::with_capacity(n * l * f * packet_size);
    for i in 0..n {
        for b in 0..l {
            for h in 0..f {
                let base = 31 * i + 17 * b + 7 * h;
                data.extend((0..packet_size).map(|o| ((base + o) % 256) as u8));
            }
        }
    }
    Ok(Library {
        n,
        l,
        f,
        packet_size,
        data,
    })
}

impl Library {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn packet_size(&self) -> usize {
        self.packet_size
    }

    /// # Panics
    /// Panics if the id is outside the library.
    pub fn packet(&self, id: PacketId) -> &[u8] {
        assert!(id.file < self.n && id.block < self.l && id.packet < self.f);
        let idx = (id.file * self.l + id.block) * self.f + id.packet;
        &self.data[idx * self.packet_size..(idx + 1) * self.packet_size]
    }
}

/// Contents of one user's cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cache {
    pub user: usize,
    packets: BTreeMap<PacketId, Vec<u8>>,
}

impl Cache {
    pub fn get(&self, id: &PacketId) -> Option<&[u8]> {
        self.packets.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &PacketId> {
        self.packets.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caches {
    pub packet_size: usize,
    pub users: Vec<Cache>,
}

/// Placement: user `j` caches packet `(i, l, h)` of every file and block
/// exactly when row `h` of column `j` is a star.
pub fn place(p: &Dpda, lib: &Library) -> Result<Caches, SimError> {
    if lib.f != p.f() {
        return Err(SimError::PacketCount {
            lib: lib.f,
            array: p.f(),
        });
    }
    let users = (0..p.k())
        .map(|j| {
            let mut packets = BTreeMap::new();
            for h in (0..p.f()).filter(|&h| p.get(h, j).is_star()) {
                for i in 0..lib.n {
                    for b in 0..lib.l {
                        let id = PacketId::new(i, b, h);
                        packets.insert(id, lib.packet(id).to_vec());
                    }
                }
            }
            Cache { user: j, packets }
        })
        .collect();
    Ok(Caches {
        packet_size: lib.packet_size,
        users,
    })
}

/// Request vectors: user `k` wants blocks `b[k] .. b[k]+L'` of file `d[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Demand {
    pub d: Vec<usize>,
    pub b: Vec<usize>,
}

impl Demand {
    pub fn new(d: Vec<usize>, b: Vec<usize>) -> Self {
        Demand { d, b }
    }

    /// Parses `d0,d1,...;b0,b1,...`.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let bad = || SimError::DemandSyntax(text.to_string());
        let (d, b) = text.trim().split_once(';').ok_or_else(bad)?;
        let list = |s: &str| -> Result<Vec<usize>, SimError> {
            s.split(',')
                .map(|x| x.trim().parse().map_err(|_| bad()))
                .collect()
        };
        Ok(Demand {
            d: list(d)?,
            b: list(b)?,
        })
    }

    pub fn check(&self, k: usize, n: usize, l: usize, lp: usize) -> Result<(), SimError> {
        if self.d.len() != k || self.b.len() != k {
            return Err(SimError::DemandLength {
                k,
                d: self.d.len(),
                b: self.b.len(),
            });
        }
        if l < lp {
            return Err(SimError::Blocks { l, lp });
        }
        for user in 0..k {
            if self.d[user] >= n {
                return Err(SimError::DemandFile {
                    user,
                    file: self.d[user],
                    n,
                });
            }
            if self.b[user] > l - lp {
                return Err(SimError::DemandStart {
                    user,
                    start: self.b[user],
                    max: l - lp,
                });
            }
        }
        Ok(())
    }

    /// Packet requested by column `col` in row `row`.
    pub fn packet_for(&self, f: usize, row: usize, col: usize) -> PacketId {
        PacketId::new(self.d[col], self.b[col] + row / f, row % f)
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{};{}", join(&self.d), join(&self.b))
    }
}

/// One broadcast transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub slot: usize,
    pub sender: usize,
    pub payload: Vec<u8>,
    /// Audit trail only; decoding never reads it.
    pub constituents: Vec<PacketId>,
}

fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

/// Cells of every slot, row-major.
fn slot_cells(p: &Dpda) -> Vec<Vec<(usize, usize)>> {
    let mut cells = vec![Vec::new(); p.s()];
    for (row, col, e) in p.cells() {
        if let Some(s) = e.slot() {
            cells[s].push((row, col));
        }
    }
    cells
}

/// Delivery: in slot `s` its sender XORs, over every cell holding `s`, the
/// packet that cell's user requests, reading each one from its own cache.
pub fn deliver(p: &Dpda, caches: &Caches, dem: &Demand) -> Result<Vec<Signal>, SimError> {
    let senders = p.slot_senders();
    slot_cells(p)
        .into_iter()
        .enumerate()
        .map(|(slot, cells)| {
            // A slot with no occurrences still costs one (empty) transmission.
            let sender = senders[slot].unwrap_or(0);
            let cache = &caches.users[sender];
            let mut payload = vec![0u8; caches.packet_size];
            let mut constituents = Vec::with_capacity(cells.len());
            for (row, col) in cells {
                let packet = dem.packet_for(p.f(), row, col);
                let bytes = cache.get(&packet).ok_or(SimError::SenderMissing {
                    slot,
                    sender,
                    packet,
                    row,
                    col,
                })?;
                xor_into(&mut payload, bytes);
                constituents.push(packet);
            }
            Ok(Signal {
                slot,
                sender,
                payload,
                constituents,
            })
        })
        .collect()
}

/// Recovers the `L'·F` packets user `k` requested, in row order.
///
/// Uses only the array, the demand, the user's cache and signal payloads.
pub fn decode(
    p: &Dpda,
    cache: &Cache,
    signals: &[Signal],
    dem: &Demand,
    k: usize,
) -> Result<Vec<(PacketId, Vec<u8>)>, SimError> {
    let by_slot: HashMap<usize, &Signal> = signals.iter().map(|s| (s.slot, s)).collect();
    let cells = slot_cells(p);
    let mut out = Vec::with_capacity(p.rows());
    for row in 0..p.rows() {
        let want = dem.packet_for(p.f(), row, k);
        let fail = |reason: String| SimError::Unrecoverable {
            user: k,
            packet: want,
            reason,
        };
        let bytes = match p.get(row, k) {
            Entry::Star => cache
                .get(&want)
                .ok_or_else(|| fail("star entry but packet not cached".into()))?
                .to_vec(),
            Entry::Coded { slot, .. } => {
                let signal = by_slot
                    .get(&slot)
                    .ok_or_else(|| fail(format!("signal for slot {slot} not received")))?;
                let mut acc = signal.payload.clone();
                for &(r, c) in &cells[slot] {
                    if (r, c) == (row, k) {
                        continue;
                    }
                    let other = dem.packet_for(p.f(), r, c);
                    let known = cache
                        .get(&other)
                        .ok_or_else(|| fail(format!("interfering packet {other} not cached")))?;
                    xor_into(&mut acc, known);
                }
                acc
            }
        };
        out.push((want, bytes));
    }
    Ok(out)
}

/// Demand selection for [`simulate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandMode {
    Single(Demand),
    Random {
        trials: usize,
        seed: u64,
    },
    /// Every `d ∈ [0,N)^K`, `b ∈ [0, L−L']^K`.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Delivery,
    Decode,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub demand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user: Option<usize>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimReport {
    pub success: bool,
    /// Packets broadcast per demand.
    pub packets_sent: usize,
    /// Packets broadcast per demand divided by `L'·F`.
    pub rate: Rational,
    pub trials: usize,
    pub failures: Vec<Failure>,
    /// Every recovered packet matched the library byte for byte.
    pub byte_exact: bool,
    /// Cache size in files, `M = Z·N/F`; may be fractional.
    pub memory: Rational,
    pub cached_packets_per_user: Vec<usize>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Runs one demand end to end. Returns the number of signals sent.
fn run_demand(
    p: &Dpda,
    lib: &Library,
    caches: &Caches,
    dem: &Demand,
    failures: &mut Vec<Failure>,
) -> Option<usize> {
    let signals = match deliver(p, caches, dem) {
        Ok(s) => s,
        Err(e) => {
            failures.push(Failure {
                kind: FailureKind::Delivery,
                demand: dem.to_string(),
                user: None,
                error: e.to_string(),
            });
            return None;
        }
    };
    let mut ok = true;
    for k in 0..p.k() {
        match decode(p, &caches.users[k], &signals, dem, k) {
            Ok(got) => {
                if let Some((id, _)) = got.iter().find(|(id, bytes)| lib.packet(*id) != &bytes[..])
                {
                    ok = false;
                    failures.push(Failure {
                        kind: FailureKind::Mismatch,
                        demand: dem.to_string(),
                        user: Some(k),
                        error: format!("decoded bytes of {id} differ from the library"),
                    });
                }
            }
            Err(e) => {
                ok = false;
                failures.push(Failure {
                    kind: FailureKind::Decode,
                    demand: dem.to_string(),
                    user: Some(k),
                    error: e.to_string(),
                });
            }
        }
    }
    ok.then_some(signals.len())
}

fn for_each_demand(k: usize, n: usize, starts: usize, mut visit: impl FnMut(Demand)) {
    let mut d = vec![0; k];
    let mut b = vec![0; k];
    loop {
        visit(Demand::new(d.clone(), b.clone()));
        // Mixed-radix increment over (d, b), last user fastest.
        let mut carried = true;
        for digit in (0..2 * k).rev() {
            let (v, radix) = if digit < k {
                (&mut d[digit], n)
            } else {
                (&mut b[digit - k], starts)
            };
            *v += 1;
            if *v < radix {
                carried = false;
                break;
            }
            *v = 0;
        }
        if carried {
            return;
        }
    }
}

/// Places, delivers and decodes for each selected demand.
pub fn simulate(
    p: &Dpda,
    n: usize,
    l: usize,
    packet_size: usize,
    mode: &DemandMode,
) -> Result<SimReport, SimError> {
    if l < p.lp() {
        return Err(SimError::Blocks { l, lp: p.lp() });
    }
    let lib = make_library(n, l, p.f(), packet_size)?;
    let caches = place(p, &lib)?;
    let mut failures = Vec::new();
    let mut trials = 0;
    let mut sent = Vec::new();
    let mut run = |dem: Demand, failures: &mut Vec<Failure>| {
        trials += 1;
        if let Some(count) = run_demand(p, &lib, &caches, &dem, failures) {
            sent.push(count);
        }
    };
    match mode {
        DemandMode::Single(dem) => {
            dem.check(p.k(), n, l, p.lp())?;
            run(dem.clone(), &mut failures);
        }
        DemandMode::Random { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*trials {
                let d = (0..p.k()).map(|_| rng.gen_range(0..n)).collect();
                let b = (0..p.k()).map(|_| rng.gen_range(0..=l - p.lp())).collect();
                run(Demand::new(d, b), &mut failures);
            }
        }
        DemandMode::Exhaustive => {
            for_each_demand(p.k(), n, l - p.lp() + 1, |dem| run(dem, &mut failures));
        }
    }
    let packets_sent = sent.first().copied().unwrap_or(p.s());
    debug_assert!(sent.iter().all(|&c| c == packets_sent));
    let byte_exact = !failures.iter().any(|f| f.kind == FailureKind::Mismatch);
    Ok(SimReport {
        success: failures.is_empty(),
        packets_sent,
        rate: Rational::new(packets_sent, p.lp() * p.f()),
        trials,
        failures,
        byte_exact,
        memory: Rational::new(p.z() * n, p.f()),
        cached_packets_per_user: caches.users.iter().map(Cache::len).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> Dpda {
        Dpda::parse(
            "DPDA K=4 L'=1 F=4 Z=2 S=4\n2^2 * * 1^1\n* 2^2 * 0^0\n3^3 * 1^1 *\n* 3^3 0^0 *\n",
        )
        .unwrap()
    }

    #[test]
    fn library_rule() {
        let lib = make_library(1, 1, 1, 1).unwrap();
        assert_eq!(lib.packet(PacketId::new(0, 0, 0)), &[0]);
        let lib = make_library(4, 3, 4, 64).unwrap();
        assert_eq!(lib.packet(PacketId::new(2, 1, 3))[5], 105);
        assert_eq!(lib, make_library(4, 3, 4, 64).unwrap());
        assert_eq!(make_library(0, 1, 1, 1), Err(SimError::ZeroParameter));
    }

    #[test]
    fn cache_sizes() {
        let lib = make_library(4, 3, 4, 8).unwrap();
        let caches = place(&p4(), &lib).unwrap();
        assert!(caches.users.iter().all(|c| c.len() == 2 * 3 * 4));
        let all = Dpda::new(2, 1, 2, 2, 0, vec![Entry::Star; 4]).unwrap();
        let caches = place(&all, &make_library(3, 2, 2, 4).unwrap()).unwrap();
        assert!(caches.users.iter().all(|c| c.len() == 3 * 2 * 2));
        assert!(matches!(
            place(&p4(), &make_library(1, 1, 3, 1).unwrap()),
            Err(SimError::PacketCount { .. })
        ));
    }

    #[test]
    fn single_coded_entry_is_sent_verbatim() {
        let p = Dpda::parse("DPDA K=2 L'=1 F=1 Z=0 S=1\n0^1 *\n").unwrap();
        let lib = make_library(2, 1, 1, 16).unwrap();
        let caches = place(&p, &lib).unwrap();
        let dem = Demand::new(vec![1, 0], vec![0, 0]);
        let sig = deliver(&p, &caches, &dem).unwrap();
        assert_eq!(sig.len(), 1);
        assert_eq!(sig[0].payload, lib.packet(PacketId::new(1, 0, 0)));
    }

    #[test]
    fn full_cache_needs_no_signals() {
        let p = Dpda::new(2, 1, 2, 2, 0, vec![Entry::Star; 4]).unwrap();
        let lib = make_library(2, 1, 2, 4).unwrap();
        let caches = place(&p, &lib).unwrap();
        let dem = Demand::new(vec![1, 0], vec![0, 0]);
        let got = decode(&p, &caches.users[0], &[], &dem, 0).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].1, lib.packet(PacketId::new(1, 0, 1)));
    }

    #[test]
    fn demand_literal() {
        let d = Demand::parse("0,1,2,3;0,1,0,1").unwrap();
        assert_eq!(d, Demand::new(vec![0, 1, 2, 3], vec![0, 1, 0, 1]));
        assert_eq!(d.to_string(), "0,1,2,3;0,1,0,1");
        assert!(Demand::parse("0,1").is_err());
        assert!(Demand::parse("0,x;1,1").is_err());
        assert!(matches!(
            d.check(4, 4, 2, 2),
            Err(SimError::DemandStart { user: 1, .. })
        ));
        assert!(matches!(
            d.check(4, 3, 3, 2),
            Err(SimError::DemandFile { user: 3, .. })
        ));
        assert!(matches!(
            d.check(3, 4, 3, 2),
            Err(SimError::DemandLength { .. })
        ));
    }

    #[test]
    fn invalid_array_is_caught_at_delivery() {
        // Sender 0 has no star in row 0.
        let p = Dpda::parse("DPDA K=2 L'=1 F=2 Z=1 S=1\n0^0 *\n* 0^0\n").unwrap();
        let lib = make_library(1, 1, 2, 4).unwrap();
        let caches = place(&p, &lib).unwrap();
        let err = deliver(&p, &caches, &Demand::new(vec![0, 0], vec![0, 0])).unwrap_err();
        assert!(matches!(
            err,
            SimError::SenderMissing {
                slot: 0,
                row: 0,
                col: 0,
                ..
            }
        ));
    }

    #[test]
    fn exhaustive_enumeration_count() {
        let mut n = 0;
        for_each_demand(3, 3, 2, |_| n += 1);
        assert_eq!(n, 27 * 8);
    }
}
