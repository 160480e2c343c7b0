#![allow(dead_code)]

pub mod oracle;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use rtasim::agents::{AccAgent, AccParams, Goal, Mode};
use rtasim::geometry::RelativeSetSpec;
use rtasim::scenario::{build_scenario, AgentConfig, Scenario, ScenarioConfig, UnsafeSpec};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn scenario_file(name: &str) -> PathBuf {
    repo_root().join("scenarios").join(name)
}

pub fn schema_file(name: &str) -> PathBuf {
    repo_root().join("schema").join(name)
}

pub fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub const SCENARIOS: [&str; 7] = [
    "acc.json",
    "acc_simrta.json",
    "acc_reachrta.json",
    "dubins.json",
    "dubins_reachrta.json",
    "gcas.json",
    "gcas_reachrta.json",
];

pub fn rtasim<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_rtasim"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A follower/leader ACC pair with a ball riding on the leader.
#[derive(Debug, Clone)]
pub struct AccCase {
    pub follower: [f64; 2],
    pub follower_mode: Mode,
    pub leader: [f64; 2],
    pub leader_mode: Mode,
    pub leader_goal_speed: f64,
    pub radius: f64,
    pub offset: f64,
    pub dt: f64,
    pub duration: f64,
    pub horizon: f64,
}

impl AccCase {
    pub fn random(rng: &mut impl Rng) -> Self {
        let p0 = rng.gen_range(0.0..5.0);
        let modes = [Mode::Untrusted, Mode::Normal, Mode::Safety];
        AccCase {
            follower: [p0, rng.gen_range(0.0..4.0)],
            follower_mode: modes[rng.gen_range(0..modes.len())],
            leader: [p0 + rng.gen_range(3.0..20.0), rng.gen_range(0.0..4.0)],
            leader_mode: [Mode::Normal, Mode::Safety, Mode::Untrusted][rng.gen_range(0..3)],
            leader_goal_speed: rng.gen_range(0.0..3.0),
            radius: rng.gen_range(2.0..9.0),
            offset: rng.gen_range(-2.0..6.0),
            dt: [0.05, 0.1, 0.2][rng.gen_range(0..3)],
            duration: rng.gen_range(2.0..5.0),
            horizon: [0.5, 1.0, 1.5][rng.gen_range(0..3)],
        }
    }

    pub fn config(&self) -> ScenarioConfig {
        let params = AccParams::default();
        let follower = AccAgent::new("follower", params).unwrap().following("leader");
        let leader = AccAgent::new("leader", params)
            .unwrap()
            .with_goal(Goal::Fixed(vec![self.leader[0] + 100.0, self.leader_goal_speed]));
        let ball = RelativeSetSpec::ball("unsafe1", vec![self.offset], self.radius, "leader").unwrap();
        ScenarioConfig {
            agents: vec![
                AgentConfig::new(follower, self.follower.to_vec(), self.follower_mode),
                AgentConfig::new(leader, self.leader.to_vec(), self.leader_mode),
            ],
            unsafe_sets: vec![UnsafeSpec::Relative(ball)],
            dt: self.dt,
            horizon: self.duration,
            dim: 1,
        }
    }

    pub fn scenario(&self) -> Scenario {
        build_scenario(self.config()).unwrap()
    }
}
