//! Brute-force reference implementations shared by the integration suites.
//!
//! Each one reads the definitions directly and shares no code with the
//! library beyond its plain data types.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use alertmapf_core::conflict::{Conflict, ConflictLocation};
use alertmapf_core::{AgentTask, ConstraintSet, GridMap, Position, ProblemInstance, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every conflict by comparing each pair of agents at each timestep.
/// Vertex pileups are merged into one conflict per `(t, cell)`.
pub fn pairwise_conflicts(trajs: &[Trajectory]) -> Vec<Conflict> {
    let mut vertex: BTreeMap<(usize, Position), BTreeSet<usize>> = BTreeMap::new();
    let mut out = Vec::new();
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            let (a, b) = (&trajs[i], &trajs[j]);
            let (ta, tb) = (a.cells.len() - 1, b.cells.len() - 1);
            for t in 0..=ta.min(tb) {
                if a.cells[t] == b.cells[t] {
                    let set = vertex.entry((t, a.cells[t])).or_default();
                    set.insert(a.agent);
                    set.insert(b.agent);
                }
            }
            for t in 0..ta.min(tb) {
                let (a0, a1, b0, b1) = (a.cells[t], a.cells[t + 1], b.cells[t], b.cells[t + 1]);
                if a0 != a1 && a0 == b1 && a1 == b0 {
                    let (lo, hi, from, to) = if a.agent < b.agent {
                        (a.agent, b.agent, a0, a1)
                    } else {
                        (b.agent, a.agent, b0, b1)
                    };
                    out.push(Conflict {
                        time: t,
                        location: ConflictLocation::Edge { from, to },
                        agents: vec![lo, hi],
                    });
                }
            }
        }
    }
    out.extend(vertex.into_iter().map(|((t, cell), agents)| Conflict {
        time: t,
        location: ConflictLocation::Vertex(cell),
        agents: agents.into_iter().collect(),
    }));
    out.sort();
    out
}

fn four_neighbors(map: &GridMap, p: Position) -> Vec<Position> {
    let mut out = Vec::new();
    if p.row > 0 {
        out.push(Position::new(p.row - 1, p.col));
    }
    out.push(Position::new(p.row + 1, p.col));
    if p.col > 0 {
        out.push(Position::new(p.row, p.col - 1));
    }
    out.push(Position::new(p.row, p.col + 1));
    out.retain(|&q| q.row < map.height() && q.col < map.width() && !map.is_blocked(q));
    out
}

/// Explicit list of timed prohibitions, checked by linear scans.
#[derive(Debug, Clone, Default)]
pub struct RawConstraints {
    /// `(cell, from)`: forbidden at every `t >= from`.
    pub cells_from: Vec<(Position, usize)>,
    pub cells_at: Vec<(Position, usize)>,
    /// `(from, to, t)`: move departing at `t`.
    pub edges: Vec<(Position, Position, usize)>,
}

impl RawConstraints {
    pub fn cell_ok(&self, c: Position, t: usize) -> bool {
        !self.cells_from.iter().any(|&(x, f)| x == c && t >= f) && !self.cells_at.contains(&(c, t))
    }

    pub fn edge_ok(&self, a: Position, b: Position, t: usize) -> bool {
        !self.edges.contains(&(a, b, t))
    }

    pub fn last_time(&self) -> usize {
        let a = self.cells_from.iter().map(|x| x.1);
        let b = self.cells_at.iter().map(|x| x.1);
        let c = self.edges.iter().map(|x| x.2);
        a.chain(b).chain(c).max().unwrap_or(0)
    }
}

/// Earliest arrival time at `goal` by layered reachability over `(cell, t)`,
/// or `None` if the goal can never be reached.
pub fn spacetime_min_arrival(
    map: &GridMap,
    start: Position,
    goal: Position,
    start_time: usize,
    constraints: &RawConstraints,
) -> Option<usize> {
    if !constraints.cell_ok(start, start_time) {
        return None;
    }
    // Once constraints stop changing, any reachable goal is reached within
    // one sweep of the free cells.
    let limit = constraints.last_time().max(start_time) + map.free_count() + 2;
    let mut layer: BTreeSet<Position> = BTreeSet::from([start]);
    for t in start_time..=limit {
        if layer.contains(&goal) {
            return Some(t);
        }
        let mut next = BTreeSet::new();
        for &c in &layer {
            let mut moves = four_neighbors(map, c);
            moves.push(c);
            for n in moves {
                if constraints.cell_ok(n, t + 1) && (n == c || constraints.edge_ok(c, n, t)) {
                    next.insert(n);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        layer = next;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointCost {
    SumOfCosts,
    Makespan,
}

/// Optimal cost of a collision-free joint plan with agents vanishing at
/// their goals, by Dijkstra over joint positions. `None` when no joint plan
/// exists.
pub fn joint_optimum(instance: &ProblemInstance, objective: JointCost) -> Option<usize> {
    let map = instance.map();
    let tasks = instance.agents();
    let n = tasks.len();
    type State = Vec<Option<Position>>;
    let start: State = tasks.iter().map(|t| Some(t.start)).collect();
    let mut dist: HashMap<State, usize> = HashMap::from([(start.clone(), 0)]);
    let mut heap = BinaryHeap::from([Reverse((0usize, start))]);

    while let Some(Reverse((d, state))) = heap.pop() {
        if dist.get(&state).is_some_and(|&best| best < d) {
            continue;
        }
        if state.iter().all(Option::is_none) {
            return Some(d);
        }
        let present: Vec<usize> = (0..n).filter(|&i| state[i].is_some()).collect();
        // Per present agent: finish (None) if at goal, else one of its moves.
        let options: Vec<Vec<Option<Position>>> = present
            .iter()
            .map(|&i| {
                let here = state[i].unwrap();
                let mut opts: Vec<Option<Position>> = Vec::new();
                if here == tasks[i].goal {
                    opts.push(None);
                }
                opts.push(Some(here));
                opts.extend(four_neighbors(map, here).into_iter().map(Some));
                opts
            })
            .collect();
        let mut choice = vec![0usize; present.len()];
        'combos: loop {
            let mut next: State = vec![None; n];
            let mut moving = 0;
            let mut valid = true;
            for (k, &i) in present.iter().enumerate() {
                next[i] = options[k][choice[k]];
                if next[i].is_some() {
                    moving += 1;
                }
            }
            'check: for (a_idx, &a) in present.iter().enumerate() {
                let Some(na) = next[a] else { continue };
                for &b in &present[a_idx + 1..] {
                    let Some(nb) = next[b] else { continue };
                    if na == nb || (na == state[b].unwrap() && nb == state[a].unwrap() && na != nb)
                    {
                        valid = false;
                        break 'check;
                    }
                }
            }
            if valid {
                let step = match objective {
                    JointCost::SumOfCosts => moving,
                    JointCost::Makespan => usize::from(moving > 0),
                };
                let nd = d + step;
                if dist.get(&next).is_none_or(|&best| nd < best) {
                    dist.insert(next.clone(), nd);
                    heap.push(Reverse((nd, next)));
                }
            }
            // Odometer over the option lists.
            let mut k = 0;
            loop {
                if k == choice.len() {
                    break 'combos;
                }
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
    None
}

/// Random map with roughly `density` blocked cells, not necessarily
/// connected. `None` if every cell came out blocked.
pub fn random_map(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    density: f64,
) -> Option<GridMap> {
    let blocked = (0..width * height)
        .map(|_| rng.random_bool(density))
        .collect();
    GridMap::new(width, height, blocked).ok()
}

/// Random solvable-looking instance: each agent's goal is reachable from its
/// start on the static map. `None` when the map cannot host `agents`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    map: GridMap,
    agents: usize,
    id: &str,
) -> Option<ProblemInstance> {
    let free: Vec<Position> = map.free_cells().collect();
    if free.len() < agents.max(2) {
        return None;
    }
    let mut used_s = BTreeSet::new();
    let mut used_g = BTreeSet::new();
    let mut tasks = Vec::new();
    for _ in 0..agents {
        let mut found = None;
        for _ in 0..200 {
            let s = free[rng.random_range(0..free.len())];
            let g = free[rng.random_range(0..free.len())];
            if s != g
                && !used_s.contains(&s)
                && !used_g.contains(&g)
                && map.shortest_distance(s, g).is_some()
            {
                found = Some((s, g));
                break;
            }
        }
        let (s, g) = found?;
        used_s.insert(s);
        used_g.insert(g);
        tasks.push(AgentTask { start: s, goal: g });
    }
    ProblemInstance::new(map, tasks, id).ok()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random walk of length `steps` from `start`, waiting with probability `wait`.
pub fn random_walk(
    rng: &mut ChaCha8Rng,
    map: &GridMap,
    agent: usize,
    start: Position,
    steps: usize,
    wait: f64,
) -> Trajectory {
    let mut cells = vec![start];
    for _ in 0..steps {
        let here = *cells.last().unwrap();
        let nbrs = four_neighbors(map, here);
        let next = if nbrs.is_empty() || rng.random_bool(wait) {
            here
        } else {
            nbrs[rng.random_range(0..nbrs.len())]
        };
        cells.push(next);
    }
    Trajectory::new(agent, cells).unwrap()
}

/// Length of a single-agent shortest path, by plain BFS.
pub fn single_agent_distance(map: &GridMap, from: Position, to: Position) -> Option<usize> {
    let mut seen = BTreeMap::from([(from, 0usize)]);
    let mut frontier = vec![from];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for c in frontier {
            let d = seen[&c];
            if c == to {
                return Some(d);
            }
            for n in four_neighbors(map, c) {
                if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(n) {
                    e.insert(d + 1);
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    None
}

/// One single-agent planning query with random timed constraints, held both
/// as raw lists for the oracle and as a library `ConstraintSet`.
pub struct Query {
    pub map: GridMap,
    pub start: Position,
    pub goal: Position,
    pub start_time: usize,
    pub raw: RawConstraints,
    pub set: ConstraintSet,
}

fn random_cell(rng: &mut ChaCha8Rng, map: &GridMap) -> Position {
    let free: Vec<Position> = map.free_cells().collect();
    free[rng.random_range(0..free.len())]
}

/// Random query on a `width x height` map (side ranges inclusive) with up to
/// `scale` timed cell bans, a few permanent bans and some edge bans, all at
/// timesteps up to `scale`.
pub fn random_query(seed: u64, sides: (usize, usize), scale: usize) -> Option<Query> {
    let mut rng = rng(seed);
    let (w, h) = (
        rng.random_range(sides.0..=sides.1),
        rng.random_range(sides.0..=sides.1),
    );
    let map = random_map(&mut rng, w, h, 0.25)?;
    let start = random_cell(&mut rng, &map);
    let goal = random_cell(&mut rng, &map);
    let start_time = rng.random_range(0..=4);
    let mut raw = RawConstraints::default();
    let mut set = ConstraintSet::new();
    for _ in 0..rng.random_range(0..=scale) {
        let c = random_cell(&mut rng, &map);
        let t = rng.random_range(0..=scale);
        raw.cells_at.push((c, t));
        set.forbid_cell_at(c, t);
    }
    for _ in 0..rng.random_range(0..=2) {
        let c = random_cell(&mut rng, &map);
        let t = rng.random_range(0..=scale);
        raw.cells_from.push((c, t));
        set.forbid_cell_from(c, t);
    }
    for _ in 0..rng.random_range(0..=scale * 2 / 3) {
        let a = random_cell(&mut rng, &map);
        let nbrs = four_neighbors(&map, a);
        if nbrs.is_empty() {
            continue;
        }
        let b = nbrs[rng.random_range(0..nbrs.len())];
        let t = rng.random_range(0..=scale);
        raw.edges.push((a, b, t));
        set.forbid_edge(a, b, t);
    }
    Some(Query {
        map,
        start,
        goal,
        start_time,
        raw,
        set,
    })
}

impl Query {
    /// Why `cells` (starting at `start_time`) is not a valid answer, if it isn't.
    pub fn check(&self, cells: &[Position]) -> Result<(), String> {
        if cells.first() != Some(&self.start) || cells.last() != Some(&self.goal) {
            return Err("wrong endpoints".into());
        }
        for (i, w) in cells.windows(2).enumerate() {
            let t = self.start_time + i;
            if !(w[0] == w[1] || w[0].is_adjacent(w[1])) || !self.map.is_free(w[1]) {
                return Err(format!("invalid step at t={t}"));
            }
            if !self.raw.cell_ok(w[1], t + 1) {
                return Err(format!("cell {} forbidden at {}", w[1], t + 1));
            }
            if w[0] != w[1] && !self.raw.edge_ok(w[0], w[1], t) {
                return Err(format!("edge forbidden at {t}"));
            }
        }
        Ok(())
    }
}
