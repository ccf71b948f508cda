//! Robot motion simulation: autonomous navigation to exhibit viewing poses
//! and low-level user control.
//!
//! Motion is turn-then-translate along straight legs between 4-connected
//! cell centers, with a point robot. Every leg stays inside the union of
//! two adjacent free cells, so the robot never enters an occupied cell.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{angle_diff, normalize_angle, Pose};
use crate::worldmap::{AnnotatedMap, Cell, ExhibitId, GridMap, LocateError};

const DIST_EPS: f64 = 1e-9;
const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Idle,
    Autonomous,
    UserControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Directional {
    Forward,
    Backward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Directional {
    pub const ALL: [Directional; 5] = [
        Directional::Forward,
        Directional::Backward,
        Directional::TurnLeft,
        Directional::TurnRight,
        Directional::Stop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Directional::Forward => "forward",
            Directional::Backward => "backward",
            Directional::TurnLeft => "turn_left",
            Directional::TurnRight => "turn_right",
            Directional::Stop => "stop",
        }
    }

    pub fn parse(s: &str) -> Option<Directional> {
        Directional::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionConfig {
    /// m/s
    pub linear_speed: f64,
    /// rad/s
    pub angular_speed: f64,
    /// Meters per forward/backward command.
    pub step_distance: f64,
    /// Radians per turn command.
    pub step_angle: f64,
    pub arrival_pos_tol: f64,
    pub arrival_heading_tol: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            linear_speed: 0.5,
            angular_speed: PI / 4.0,
            step_distance: 0.5,
            step_angle: PI / 6.0,
            arrival_pos_tol: 0.1,
            arrival_heading_tol: 5.0_f64.to_radians(),
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        let fields = [
            (self.linear_speed, "linear_speed"),
            (self.angular_speed, "angular_speed"),
            (self.step_distance, "step_distance"),
            (self.step_angle, "step_angle"),
            (self.arrival_pos_tol, "arrival_pos_tol"),
            (self.arrival_heading_tol, "arrival_heading_tol"),
        ];
        for (v, name) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(name);
            }
        }
        Ok(())
    }
}

/// Route to an exhibit's viewing pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub exhibit: ExhibitId,
    /// Pose the plan was computed from.
    pub start: Pose,
    /// 4-connected free cells from the start cell to the goal cell.
    pub cells: Vec<Cell>,
    /// Centers of `cells`.
    pub waypoints: Vec<(f64, f64)>,
    /// Exact viewing position inside the goal cell.
    pub target: (f64, f64),
    pub final_heading: f64,
}

impl Plan {
    /// Every point the robot drives to, in order.
    fn legs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.waypoints.iter().copied().chain(core::iter::once(self.target))
    }

    fn leg(&self, i: usize) -> Option<(f64, f64)> {
        if i < self.waypoints.len() {
            Some(self.waypoints[i])
        } else if i == self.waypoints.len() {
            Some(self.target)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("unknown exhibit {0}")]
    UnknownExhibit(ExhibitId),
    #[error("no path from the robot to exhibit {0}")]
    NoPath(ExhibitId),
    #[error("start pose is not on a free cell: {0}")]
    BadStart(LocateError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pose: Pose,
    mode: Mode,
    plan: Option<Plan>,
    /// Index of the next leg in the active plan.
    leg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NavEvent {
    Arrived(ExhibitId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: RobotState,
    pub blocked: bool,
}

impl RobotState {
    pub fn new(pose: Pose) -> Self {
        RobotState {
            pose: Pose::new(pose.x, pose.y, pose.theta),
            mode: Mode::Idle,
            plan: None,
            leg: 0,
        }
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn plan(&self) -> Option<&Plan> {
        self.plan.as_ref()
    }

    pub fn goal_exhibit(&self) -> Option<ExhibitId> {
        self.plan.as_ref().map(|p| p.exhibit)
    }

    /// Switches to autonomous mode following `plan`.
    pub fn with_plan(&self, plan: Plan) -> RobotState {
        RobotState {
            pose: self.pose,
            mode: Mode::Autonomous,
            plan: Some(plan),
            leg: 0,
        }
    }

    /// Drops any plan and idles in place.
    pub fn halted(&self) -> RobotState {
        RobotState::new(self.pose)
    }

    /// Remaining waypoints of the active plan.
    pub fn remaining_waypoints(&self) -> &[(f64, f64)] {
        match &self.plan {
            Some(p) => &p.waypoints[self.leg.min(p.waypoints.len())..],
            None => &[],
        }
    }
}

/// Shortest 4-connected path between two free cells (A*, Manhattan heuristic).
pub fn shortest_path(grid: &GridMap, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    if !grid.is_free(from) || !grid.is_free(to) {
        return None;
    }
    let n = grid.width() * grid.height();
    let h = |c: Cell| (c.col.abs_diff(to.col) + c.row.abs_diff(to.row)) as u32;
    let mut g = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let start = grid.index(from);
    g[start] = 0;
    // (f, h, index): ties on f expand the cell nearer the goal first.
    open.push(Reverse((h(from), h(from), start)));
    while let Some(Reverse((_, _, idx))) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let cell = grid.cell_at(idx);
        if cell == to {
            let mut path = vec![cell];
            let mut cur = idx;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(grid.cell_at(cur));
            }
            path.reverse();
            return Some(path);
        }
        for (dc, dr) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (c, r) = (cell.col as i64 + dc, cell.row as i64 + dr);
            if !grid.in_bounds(c, r) {
                continue;
            }
            let next = Cell::new(c as usize, r as usize);
            if !grid.is_free(next) {
                continue;
            }
            let ni = grid.index(next);
            let cost = g[idx] + 1;
            if cost < g[ni] {
                g[ni] = cost;
                parent[ni] = idx;
                open.push(Reverse((cost + h(next), h(next), ni)));
            }
        }
    }
    None
}

/// Plans from `start` to the viewing pose of `goal`.
pub fn plan_path(map: &AnnotatedMap, start: Pose, goal: ExhibitId) -> Result<Plan, PlanError> {
    let exhibit = map.exhibit(goal).ok_or(PlanError::UnknownExhibit(goal))?;
    let grid = map.grid();
    let from = grid.cell_of(start.x, start.y).map_err(PlanError::BadStart)?;
    if !grid.is_free(from) {
        return Err(PlanError::BadStart(LocateError::OccupiedCell(from)));
    }
    let vp = exhibit.viewing_pose;
    let to = grid
        .cell_of(vp.x, vp.y)
        .expect("validated viewing poses are in bounds");
    let cells = shortest_path(grid, from, to).ok_or(PlanError::NoPath(goal))?;
    let waypoints = cells.iter().map(|&c| grid.cell_center(c)).collect();
    Ok(Plan {
        exhibit: goal,
        start,
        cells,
        waypoints,
        target: (vp.x, vp.y),
        final_heading: vp.theta,
    })
}

/// Executes one low-level command. Movement preempts any autonomous plan.
pub fn apply_low_level(
    state: &RobotState,
    cmd: Directional,
    cfg: &MotionConfig,
    map: &AnnotatedMap,
) -> StepResult {
    let pose = state.pose;
    let mut next = RobotState {
        pose,
        mode: Mode::UserControl,
        plan: None,
        leg: 0,
    };
    let mut blocked = false;
    match cmd {
        Directional::Stop => next.mode = Mode::Idle,
        Directional::TurnLeft => next.pose = Pose::new(pose.x, pose.y, pose.theta + cfg.step_angle),
        Directional::TurnRight => next.pose = Pose::new(pose.x, pose.y, pose.theta - cfg.step_angle),
        Directional::Forward | Directional::Backward => {
            let sign = if cmd == Directional::Forward { 1.0 } else { -1.0 };
            let (dx, dy) = (libm::cos(pose.theta) * sign, libm::sin(pose.theta) * sign);
            let (x, y, full) = march(map.grid(), pose.x, pose.y, dx, dy, cfg.step_distance);
            blocked = !full;
            next.pose = Pose::new(x, y, pose.theta);
        }
    }
    StepResult { state: next, blocked }
}

/// Walks up to `dist` along the unit direction, stopping at the last free sample.
fn march(grid: &GridMap, x0: f64, y0: f64, dx: f64, dy: f64, dist: f64) -> (f64, f64, bool) {
    let sub = grid.resolution() / 20.0;
    let n = libm::ceil(dist / sub).max(1.0) as usize;
    let (mut x, mut y) = (x0, y0);
    for i in 1..=n {
        let d = dist * i as f64 / n as f64;
        let (px, py) = (x0 + dx * d, y0 + dy * d);
        if !grid.point_is_free(px, py) {
            return (x, y, false);
        }
        x = px;
        y = py;
    }
    (x, y, true)
}

/// Advances autonomous motion by `dt` seconds.
pub fn tick(
    state: &RobotState,
    dt: f64,
    cfg: &MotionConfig,
) -> (RobotState, Option<NavEvent>) {
    let mut s = state.clone();
    if s.mode != Mode::Autonomous || !(dt > 0.0) {
        return (s, None);
    }
    let plan = s.plan.take().expect("autonomous mode carries a plan");
    let mut budget = dt;
    let mut arrived = false;
    // Zero-duration steps (reached legs, aligned headings) run even when the
    // budget is spent, so arrival is reported on the tick that completes it.
    loop {
        match plan.leg(s.leg) {
            Some((tx, ty)) => {
                let (ex, ey) = (tx - s.pose.x, ty - s.pose.y);
                let dist = libm::hypot(ex, ey);
                if dist <= DIST_EPS {
                    s.pose.x = tx;
                    s.pose.y = ty;
                    s.leg += 1;
                    continue;
                }
                let heading = libm::atan2(ey, ex);
                if !rotate_toward(&mut s.pose, heading, &mut budget, cfg) || budget <= 0.0 {
                    break;
                }
                let reach = cfg.linear_speed * budget;
                if reach >= dist {
                    budget -= dist / cfg.linear_speed;
                    s.pose.x = tx;
                    s.pose.y = ty;
                    s.leg += 1;
                } else {
                    s.pose.x += ex / dist * reach;
                    s.pose.y += ey / dist * reach;
                    budget = 0.0;
                }
            }
            None => {
                if rotate_toward(&mut s.pose, plan.final_heading, &mut budget, cfg) {
                    arrived = true;
                }
                break;
            }
        }
    }
    if arrived {
        let id = plan.exhibit;
        return (s.halted(), Some(NavEvent::Arrived(id)));
    }
    s.plan = Some(plan);
    (s, None)
}

/// Rotates toward `heading` within the time budget; true once aligned.
fn rotate_toward(pose: &mut Pose, heading: f64, budget: &mut f64, cfg: &MotionConfig) -> bool {
    let err = angle_diff(heading, pose.theta);
    if err.abs() <= ANGLE_EPS {
        return true;
    }
    let needed = err.abs() / cfg.angular_speed;
    if *budget >= needed {
        *budget -= needed;
        pose.theta = normalize_angle(heading);
        true
    } else {
        pose.theta = normalize_angle(pose.theta + err.signum() * cfg.angular_speed * *budget);
        *budget = 0.0;
        false
    }
}

/// Time the simulator needs to execute `plan` from its start pose.
pub fn eta(plan: &Plan, cfg: &MotionConfig) -> f64 {
    let mut total = 0.0;
    let (mut x, mut y, mut theta) = (plan.start.x, plan.start.y, plan.start.theta);
    for (tx, ty) in plan.legs() {
        let (ex, ey) = (tx - x, ty - y);
        let dist = libm::hypot(ex, ey);
        if dist <= DIST_EPS {
            x = tx;
            y = ty;
            continue;
        }
        let heading = libm::atan2(ey, ex);
        let err = angle_diff(heading, theta);
        if err.abs() > ANGLE_EPS {
            total += err.abs() / cfg.angular_speed;
        }
        theta = heading;
        total += dist / cfg.linear_speed;
        x = tx;
        y = ty;
    }
    let err = angle_diff(plan.final_heading, theta);
    if err.abs() > ANGLE_EPS {
        total += err.abs() / cfg.angular_speed;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmap::testutil::{doc_from_rows, exhibit};
    use alloc::collections::VecDeque;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corridor() -> AnnotatedMap {
        // 0.5 m cells; exhibit 1 sits 2 m east of the start cell center.
        let rows = ["##########", "#........#", "##########"];
        let mut doc = doc_from_rows(&rows, vec![exhibit(1, "End", "hall", 2.75, 0.75, 0.0)]);
        doc.grid.resolution = 0.5;
        doc.start_pose = Some(Pose::new(0.75, 0.75, 0.0));
        AnnotatedMap::from_document(doc).unwrap()
    }

    fn run_to_arrival(map: &AnnotatedMap, state: RobotState, dt: f64) -> (RobotState, f64) {
        let cfg = MotionConfig::default();
        let mut s = state;
        let mut t = 0.0;
        for _ in 0..100_000 {
            let (n, ev) = tick(&s, dt, &cfg);
            s = n;
            t += dt;
            if ev.is_some() {
                return (s, t);
            }
            assert!(map.grid().point_is_free(s.pose.x, s.pose.y));
        }
        panic!("never arrived");
    }

    #[test]
    fn straight_corridor_timing() {
        let map = corridor();
        let plan = plan_path(&map, map.start_pose(), 1).unwrap();
        assert_eq!(plan.waypoints.len(), 5);
        let cfg = MotionConfig::default();
        assert!((eta(&plan, &cfg) - 4.0).abs() < 1e-12);
        let dt = 0.1;
        let (s, t) = run_to_arrival(&map, RobotState::new(map.start_pose()).with_plan(plan), dt);
        assert!((t - 4.0).abs() <= dt + 1e-9, "arrived at {t}");
        assert_eq!(s.mode(), Mode::Idle);
        assert!(s.plan().is_none());
    }

    #[test]
    fn single_waypoint_plan() {
        let map = corridor();
        let vp = map.exhibit(1).unwrap().viewing_pose;
        let plan = plan_path(&map, vp, 1).unwrap();
        assert_eq!(plan.waypoints.len(), 1);
        assert_eq!(plan.final_heading, vp.theta);
        assert_eq!(eta(&plan, &MotionConfig::default()), 0.0);
        let (_, ev) = tick(&RobotState::new(vp).with_plan(plan), 0.01, &MotionConfig::default());
        assert_eq!(ev, Some(NavEvent::Arrived(1)));
    }

    #[test]
    fn right_angle_turn_costs_two_seconds() {
        // Start facing east, exhibit straight north: a pi/2 turn then 1 m.
        let rows = ["###", "#.#", "#.#", "#.#", "###"];
        let mut doc = doc_from_rows(&rows, vec![exhibit(1, "Top", "hall", 0.75, 1.75, PI / 2.0)]);
        doc.grid.resolution = 0.5;
        let map = AnnotatedMap::from_document(doc).unwrap();
        let start = Pose::new(0.75, 0.75, 0.0);
        let plan = plan_path(&map, start, 1).unwrap();
        let cfg = MotionConfig::default();
        assert!((eta(&plan, &cfg) - (2.0 + 2.0)).abs() < 1e-12);
        // After 2 s the robot has only turned.
        let s = RobotState::new(start).with_plan(plan);
        let (s, ev) = tick(&s, 2.0, &cfg);
        assert!(ev.is_none());
        assert_eq!((s.pose().x, s.pose().y), (0.75, 0.75));
        assert!((s.pose().theta - PI / 2.0).abs() < 1e-12);
        let (s, ev) = tick(&s, 1.0, &cfg);
        assert!(ev.is_none());
        assert!((s.pose().y - 1.25).abs() < 1e-12);
        let (_, ev) = tick(&s, 1.0, &cfg);
        assert_eq!(ev, Some(NavEvent::Arrived(1)));
    }

    #[test]
    fn idle_tick_is_identity() {
        let map = corridor();
        let s = RobotState::new(map.start_pose());
        let (n, ev) = tick(&s, 1.0, &MotionConfig::default());
        assert_eq!(n, s);
        assert!(ev.is_none());
    }

    #[test]
    fn walled_off_goal() {
        let rows = ["...#..."];
        let doc = doc_from_rows(&rows, vec![exhibit(2, "Far", "hall", 5.5, 0.5, 0.0)]);
        let map = AnnotatedMap::from_document(doc).unwrap();
        assert_eq!(
            plan_path(&map, Pose::new(0.5, 0.5, 0.0), 2).unwrap_err(),
            PlanError::NoPath(2)
        );
        assert_eq!(
            plan_path(&map, Pose::new(0.5, 0.5, 0.0), 3).unwrap_err(),
            PlanError::UnknownExhibit(3)
        );
    }

    #[test]
    fn low_level_kinematics() {
        let rows = [".........."; 10];
        let mut doc = doc_from_rows(&rows, vec![]);
        doc.grid.resolution = 0.5;
        let map = AnnotatedMap::from_document(doc).unwrap();
        let cfg = MotionConfig::default();
        let s = RobotState::new(Pose::new(1.0, 1.0, 0.0));
        let r = apply_low_level(&s, Directional::Forward, &cfg, &map);
        assert!(!r.blocked);
        assert!((r.state.pose().x - 1.5).abs() < 1e-12);
        assert_eq!(r.state.pose().y, 1.0);
        assert_eq!(r.state.mode(), Mode::UserControl);

        let r = apply_low_level(&s, Directional::TurnLeft, &cfg, &map);
        assert!((r.state.pose().theta - PI / 6.0).abs() < 1e-12);

        let r = apply_low_level(&s, Directional::Stop, &cfg, &map);
        assert_eq!(r.state.mode(), Mode::Idle);
    }

    /// Distance to the first occupied point along a ray, sampled finely.
    fn ray_march_oracle(map: &AnnotatedMap, p: Pose, max: f64) -> f64 {
        let step = 1e-4;
        let mut d = 0.0;
        while d < max {
            let nd = d + step;
            if !map
                .grid()
                .point_is_free(p.x + libm::cos(p.theta) * nd, p.y + libm::sin(p.theta) * nd)
            {
                return d;
            }
            d = nd;
        }
        max
    }

    #[test]
    fn forward_into_wall_is_clipped() {
        // 0.1 m cells; wall column starts at x = 1.2.
        let mut rows = vec![];
        for _ in 0..20 {
            rows.push("............#.......");
        }
        let mut doc = doc_from_rows(&rows, vec![]);
        doc.grid.resolution = 0.1;
        doc.areas[0].cells.retain(|c| c[0] != 12);
        let map = AnnotatedMap::from_document(doc).unwrap();
        let start = Pose::new(1.0, 1.0, 0.0);
        let free = ray_march_oracle(&map, start, 0.5);
        assert!((free - 0.2).abs() < 2e-4);
        let cfg = MotionConfig::default();
        let r = apply_low_level(&RobotState::new(start), Directional::Forward, &cfg, &map);
        let advanced = r.state.pose().x - 1.0;
        assert!(r.blocked);
        assert!(advanced <= free + 1e-9, "advanced {advanced}");
        assert!(advanced >= free - 0.1 / 20.0 - 1e-9, "advanced {advanced}");
    }

    #[test]
    fn low_level_preempts_plan() {
        let map = corridor();
        let plan = plan_path(&map, map.start_pose(), 1).unwrap();
        let s = RobotState::new(map.start_pose()).with_plan(plan);
        let r = apply_low_level(&s, Directional::TurnRight, &MotionConfig::default(), &map);
        assert_eq!(r.state.mode(), Mode::UserControl);
        assert!(r.state.plan().is_none());
        assert!(r.state.goal_exhibit().is_none());
    }

    fn bfs_distance(grid: &GridMap, from: Cell, to: Cell) -> Option<usize> {
        let mut dist = vec![usize::MAX; grid.width() * grid.height()];
        let mut q = VecDeque::new();
        dist[grid.index(from)] = 0;
        q.push_back(from);
        while let Some(c) = q.pop_front() {
            if c == to {
                return Some(dist[grid.index(c)]);
            }
            let d = dist[grid.index(c)];
            for (dc, dr) in [(0i64, 1i64), (1, 0), (0, -1), (-1, 0)] {
                let (nc, nr) = (c.col as i64 + dc, c.row as i64 + dr);
                if grid.in_bounds(nc, nr) {
                    let n = Cell::new(nc as usize, nr as usize);
                    if grid.is_free(n) && dist[grid.index(n)] == usize::MAX {
                        dist[grid.index(n)] = d + 1;
                        q.push_back(n);
                    }
                }
            }
        }
        None
    }

    fn random_grid(seed: u64, w: usize, h: usize, density: f64) -> GridMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let occ = (0..w * h).map(|_| rng.gen_bool(density)).collect::<Vec<_>>();
        GridMap::new(1.0, (0.0, 0.0), w, h, occ).unwrap()
    }

    #[test]
    fn astar_matches_bfs_on_random_grids() {
        let mut checked = 0;
        for seed in 0..200u64 {
            let grid = random_grid(seed, 20, 20, 0.2);
            let free: Vec<Cell> = grid.free_cells().collect();
            let (a, b) = (free[0], free[free.len() - 1]);
            let oracle = bfs_distance(&grid, a, b);
            let path = shortest_path(&grid, a, b);
            assert_eq!(oracle.map(|d| d + 1), path.as_ref().map(|p| p.len()), "seed {seed}");
            if let Some(p) = path {
                for w in p.windows(2) {
                    assert_eq!(w[0].col.abs_diff(w[1].col) + w[0].row.abs_diff(w[1].row), 1);
                }
                assert!(p.iter().all(|&c| grid.is_free(c)));
                assert_eq!(*p.last().unwrap(), b);
                checked += 1;
            }
        }
        assert!(checked >= 50);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn robot_never_enters_occupied_cells(seed in 0u64..10_000, cmds in prop::collection::vec(0u8..7, 1..60)) {
            let grid = random_grid(seed, 12, 12, 0.25);
            let rows = grid.to_rows();
            let row_refs: Vec<&str> = rows.iter().map(|r| r.as_str()).collect();
            let free: Vec<Cell> = grid.free_cells().collect();
            let goal = free[free.len() - 1];
            let (gx, gy) = grid.cell_center(goal);
            let mut doc = doc_from_rows(&row_refs, vec![exhibit(1, "Goal", "hall", gx + 0.2, gy - 0.3, 1.0)]);
            doc.grid.resolution = 1.0;
            let map = AnnotatedMap::from_document(doc).unwrap();
            let (sx, sy) = grid.cell_center(free[0]);
            let mut s = RobotState::new(Pose::new(sx - 0.3, sy + 0.1, 0.3));
            let cfg = MotionConfig { step_distance: 0.7, ..MotionConfig::default() };
            for c in cmds {
                s = match c {
                    0..=4 => apply_low_level(&s, Directional::ALL[c as usize], &cfg, &map).state,
                    5 => match plan_path(&map, s.pose(), 1) {
                        Ok(p) => s.with_plan(p),
                        Err(_) => s,
                    },
                    _ => tick(&s, 0.37, &cfg).0,
                };
                prop_assert!(map.grid().point_is_free(s.pose().x, s.pose().y));
                let th = s.pose().theta;
                prop_assert!(th > -PI && th <= PI);
                prop_assert_eq!(s.plan().is_some(), s.mode() == Mode::Autonomous);
            }
        }

        #[test]
        fn eta_matches_simulated_time(seed in 0u64..5_000, theta in -3.0f64..3.0) {
            let grid = random_grid(seed, 10, 10, 0.15);
            let rows = grid.to_rows();
            let row_refs: Vec<&str> = rows.iter().map(|r| r.as_str()).collect();
            let free: Vec<Cell> = grid.free_cells().collect();
            let goal = free[free.len() - 1];
            let (gx, gy) = grid.cell_center(goal);
            let map = AnnotatedMap::from_document(doc_from_rows(
                &row_refs,
                vec![exhibit(1, "Goal", "hall", gx, gy, -2.0)],
            )).unwrap();
            let (sx, sy) = grid.cell_center(free[0]);
            let start = Pose::new(sx, sy, theta);
            if let Ok(plan) = plan_path(&map, start, 1) {
                let cfg = MotionConfig::default();
                let expected = eta(&plan, &cfg);
                let dt = 0.05;
                let (s, t) = run_to_arrival(&map, RobotState::new(start).with_plan(plan), dt);
                prop_assert!(t >= expected - 1e-9 && t <= expected + dt + 1e-9, "t={} eta={}", t, expected);
                prop_assert!(s.pose().distance(&map.exhibit(1).unwrap().viewing_pose) <= 1e-9);
            }
        }

        #[test]
        fn ticking_is_deterministic(split in 1usize..20) {
            let map = corridor();
            let plan = plan_path(&map, Pose::new(0.6, 0.7, 2.0), 1).unwrap();
            let s0 = RobotState::new(Pose::new(0.6, 0.7, 2.0)).with_plan(plan);
            let cfg = MotionConfig::default();
            let run = || {
                let mut s = s0.clone();
                let mut trace = Vec::new();
                for _ in 0..split * 3 {
                    s = tick(&s, 0.13, &cfg).0;
                    trace.push((s.pose().x.to_bits(), s.pose().y.to_bits(), s.pose().theta.to_bits()));
                }
                trace
            };
            prop_assert_eq!(run(), run());
        }
    }
}
