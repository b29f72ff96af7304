//! Streaming the curriculum through encoder and learner, and scoring it.
//!
//! Every output row of the learner corresponds to one global class id. In the
//! task-incremental scenario each task's classes form that task's head: only
//! those rows are plastic while the task streams, and predictions for its test
//! samples are restricted to them. Single-task and class-incremental runs share
//! one head over every output.

mod metrics;
mod report;

use serde::{Deserialize, Serialize};

use crate::dataio::{Curriculum, Sample, Scenario};
use crate::encoder::Encoder;
use crate::error::{NnaError, Result};
use crate::plasticity::Learner;

pub use metrics::{average_forgetting, evaluate, make_modulatory, predict, weight_trace};
pub use report::{RunRecord, RunReport, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Record a weight trace every this many streamed samples; 0 disables.
    pub trace_every: usize,
    /// Fill the whole accuracy matrix. When off only the final row is
    /// evaluated (enough for a final accuracy, not for forgetting).
    pub eval_each_episode: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trace_every: 500,
            eval_each_episode: true,
        }
    }
}

/// Weight trace snapshot taken during streaming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Samples streamed so far, over the whole curriculum.
    pub sample: usize,
    pub episode: usize,
    /// Online accuracy of the current episode so far.
    pub online_accuracy: f64,
    /// Mean presynaptic weight of each output neuron.
    pub weights: Vec<f64>,
}

/// Everything measured during one pass over a curriculum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: Scenario,
    /// Row `i` holds test accuracy on tasks `0..=i` after episode `i`. Rows
    /// that were not evaluated are empty.
    pub accuracy_matrix: Vec<Vec<f64>>,
    /// Online (pre-update) accuracy of each episode.
    pub online_accuracy: Vec<f64>,
    /// Accuracy on the union of seen tasks' test samples with every output
    /// allowed, per evaluated episode (`None` when skipped).
    pub union_accuracy: Vec<Option<f64>>,
    pub final_accuracy: f64,
    pub avg_accuracy_per_task: Vec<Option<f64>>,
    pub avg_forgetting_per_task: Vec<Option<f64>>,
    pub weight_traces: Vec<TracePoint>,
    pub iterations: usize,
}

/// Algorithm 1 over a curriculum, resumable sample by sample.
pub struct ScenarioRunner<'a> {
    encoder: Encoder,
    learner: Learner,
    curriculum: Curriculum,
    heads: Vec<Vec<usize>>,
    train: &'a [Sample],
    test: &'a [Sample],
    /// Task position of every test sample, `None` when outside the curriculum.
    test_task: Vec<Option<usize>>,
    options: RunOptions,

    pos: usize,
    stream: Option<Vec<usize>>,
    cursor: usize,
    episode_hits: usize,
    seen: usize,
    online: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    union: Vec<Option<f64>>,
    traces: Vec<TracePoint>,
    x_e: Vec<f64>,
    x_m: Vec<f64>,
}

impl<'a> ScenarioRunner<'a> {
    /// `train` must be the sample list the curriculum was built over.
    pub fn new(
        encoder: Encoder,
        learner: Learner,
        curriculum: Curriculum,
        train: &'a [Sample],
        test: &'a [Sample],
        options: RunOptions,
    ) -> Result<Self> {
        if learner.inputs() != encoder.output_dim() {
            return Err(NnaError::DimensionMismatch {
                expected: encoder.output_dim(),
                actual: learner.inputs(),
            });
        }
        let width = learner.outputs();
        let mut owner = vec![None; width];
        for (p, t) in curriculum.tasks.iter().enumerate() {
            for &c in &t.classes {
                if c >= width {
                    return Err(NnaError::LabelOutOfRange { label: c, classes: width });
                }
                owner[c] = Some(p);
            }
        }
        let heads = match curriculum.scenario {
            Scenario::TaskIncremental => curriculum.tasks.iter().map(|t| t.classes.clone()).collect(),
            _ => vec![(0..width).collect(); curriculum.tasks.len()],
        };
        let test_task = test.iter().map(|s| owner.get(s.label).copied().flatten()).collect();
        let x_e = vec![0.0; encoder.output_dim()];
        let episodes = curriculum.tasks.len();
        Ok(ScenarioRunner {
            encoder,
            learner,
            curriculum,
            heads,
            train,
            test,
            test_task,
            options,
            pos: 0,
            stream: None,
            cursor: 0,
            episode_hits: 0,
            seen: 0,
            online: Vec::with_capacity(episodes),
            matrix: Vec::with_capacity(episodes),
            union: Vec::with_capacity(episodes),
            traces: Vec::new(),
            x_e,
            x_m: vec![0.0; width],
        })
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn curriculum(&self) -> &Curriculum {
        &self.curriculum
    }

    /// Output indices forming the head of task position `pos`.
    pub fn head(&self, pos: usize) -> &[usize] {
        &self.heads[pos]
    }

    fn allowed(&self, pos: usize) -> Option<&[usize]> {
        match self.curriculum.scenario {
            Scenario::TaskIncremental => Some(&self.heads[pos]),
            _ => None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.curriculum.tasks.len()
    }

    /// Samples streamed so far.
    pub fn samples_seen(&self) -> usize {
        self.seen
    }

    /// Fraction of the curriculum's iterations already streamed.
    pub fn progress(&self) -> f64 {
        let total = self.curriculum.total_iterations();
        if total == 0 {
            1.0
        } else {
            self.seen as f64 / total as f64
        }
    }

    /// Stream up to `budget` samples, finishing episodes as their streams
    /// run out. Returns the number of samples consumed.
    pub fn advance(&mut self, budget: usize) -> Result<usize> {
        let mut used = 0;
        while !self.is_done() {
            if self.stream.is_none() {
                self.stream = Some(self.curriculum.episode_stream(self.pos));
                self.cursor = 0;
                self.episode_hits = 0;
            }
            let len = self.stream.as_ref().map_or(0, Vec::len);
            if self.cursor == len {
                self.finish_episode()?;
                continue;
            }
            if used == budget {
                break;
            }
            self.step()?;
            used += 1;
        }
        Ok(used)
    }

    /// Stream the rest of the current episode and evaluate it. Returns the
    /// episode's online accuracy (hits over its iteration count).
    pub fn run_episode(&mut self) -> Result<f64> {
        if self.is_done() {
            return Err(NnaError::InvalidConfig("curriculum already complete".into()));
        }
        let left = match &self.stream {
            Some(s) => s.len() - self.cursor,
            None => self.curriculum.iterations(self.pos),
        };
        self.advance(left)?;
        Ok(*self.online.last().expect("episode finished"))
    }

    fn step(&mut self) -> Result<()> {
        let idx = self.stream.as_ref().expect("episode stream loaded")[self.cursor];
        let sample = &self.train[idx];
        self.encoder.encode_into(&sample.features, &mut self.x_e)?;
        if sample.label >= self.x_m.len() {
            return Err(NnaError::LabelOutOfRange {
                label: sample.label,
                classes: self.x_m.len(),
            });
        }
        self.x_m.fill(0.0);
        self.x_m[sample.label] = 1.0;
        let rows = match self.curriculum.scenario {
            Scenario::TaskIncremental => Some(self.heads[self.pos].as_slice()),
            _ => None,
        };
        let x_o = self.learner.step_rows(&self.x_e, &self.x_m, rows)?;
        if predict(&x_o, self.allowed(self.pos)) == sample.label {
            self.episode_hits += 1;
        }
        self.cursor += 1;
        self.seen += 1;
        if self.options.trace_every > 0 && self.seen.is_multiple_of(self.options.trace_every) {
            self.traces.push(TracePoint {
                sample: self.seen,
                episode: self.pos,
                online_accuracy: self.episode_hits as f64 / self.cursor as f64,
                weights: self.learner.weight_trace(),
            });
        }
        Ok(())
    }

    fn finish_episode(&mut self) -> Result<()> {
        let n = self.stream.as_ref().map_or(0, Vec::len);
        self.online.push(if n == 0 {
            0.0
        } else {
            self.episode_hits as f64 / n as f64
        });
        let last = self.pos + 1 == self.curriculum.tasks.len();
        if self.options.eval_each_episode || last {
            let (row, union) = self.evaluate_seen(self.pos, usize::MAX)?;
            self.matrix.push(row);
            self.union.push(Some(union));
        } else {
            self.matrix.push(Vec::new());
            self.union.push(None);
        }
        self.pos += 1;
        self.stream = None;
        Ok(())
    }

    /// Test accuracy on each task `0..=upto` plus accuracy on their union,
    /// taking at most `cap` samples (in test-set order). Pure.
    fn evaluate_seen(&self, upto: usize, cap: usize) -> Result<(Vec<f64>, f64)> {
        let mut hits = vec![0usize; upto + 1];
        let mut count = vec![0usize; upto + 1];
        let mut union_hits = 0;
        let mut x_e = vec![0.0; self.encoder.output_dim()];
        let mut taken = 0;
        for (s, task) in self.test.iter().zip(&self.test_task) {
            let Some(t) = *task else { continue };
            if t > upto {
                continue;
            }
            if taken == cap {
                break;
            }
            taken += 1;
            self.encoder.encode_into(&s.features, &mut x_e)?;
            let x_o = self.learner.forward(&x_e)?;
            let free = predict(&x_o, None);
            union_hits += usize::from(free == s.label);
            let guess = match self.allowed(t) {
                Some(head) => predict(&x_o, Some(head)),
                None => free,
            };
            hits[t] += usize::from(guess == s.label);
            count[t] += 1;
        }
        if taken == 0 || (cap == usize::MAX && count.contains(&0)) {
            return Err(NnaError::EmptyTestSet);
        }
        let row = hits
            .iter()
            .zip(&count)
            .map(|(&h, &c)| if c == 0 { 0.0 } else { h as f64 / c as f64 })
            .collect();
        Ok((row, union_hits as f64 / taken as f64))
    }

    /// Intermediate score for pruning: online accuracy over everything
    /// streamed so far, except in class-incremental runs where it is the
    /// union accuracy over the tasks reached so far on at most `probe`
    /// evaluation samples.
    pub fn partial_score(&self, probe: usize) -> Result<f64> {
        if self.curriculum.scenario == Scenario::ClassIncremental {
            let upto = self.pos.min(self.curriculum.tasks.len() - 1);
            return Ok(self.evaluate_seen(upto, probe.max(1))?.1);
        }
        let done: f64 = self
            .online
            .iter()
            .enumerate()
            .map(|(p, a)| a * self.curriculum.iterations(p) as f64)
            .sum();
        let hits = done + if self.stream.is_some() { self.episode_hits as f64 } else { 0.0 };
        Ok(if self.seen == 0 { 0.0 } else { hits / self.seen as f64 })
    }

    /// Run the remaining curriculum and collect the metrics.
    pub fn run_to_end(mut self) -> Result<(RunResult, Learner)> {
        self.advance(usize::MAX)?;
        self.finish()
    }

    /// Collect metrics; the curriculum must be complete.
    pub fn finish(self) -> Result<(RunResult, Learner)> {
        if !self.is_done() {
            return Err(NnaError::InvalidConfig("run finished before its curriculum ended".into()));
        }
        let last = self.matrix.last().cloned().unwrap_or_default();
        let final_accuracy = match self.curriculum.scenario {
            Scenario::ClassIncremental => self.union.last().copied().flatten().unwrap_or(0.0),
            _ => mean(&last),
        };
        let full = self.matrix.iter().all(|r| !r.is_empty());
        let avg_accuracy_per_task = self
            .matrix
            .iter()
            .map(|r| (!r.is_empty()).then(|| mean(r)))
            .collect();
        let avg_forgetting_per_task = (1..=self.matrix.len())
            .map(|i| {
                if i >= 2 && full {
                    average_forgetting(&self.matrix, i).ok()
                } else {
                    None
                }
            })
            .collect();
        let result = RunResult {
            scenario: self.curriculum.scenario,
            accuracy_matrix: self.matrix,
            online_accuracy: self.online,
            union_accuracy: self.union,
            final_accuracy,
            avg_accuracy_per_task,
            avg_forgetting_per_task,
            weight_traces: self.traces,
            iterations: self.seen,
        };
        Ok((result, self.learner))
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Build a runner and stream the whole curriculum.
pub fn run_curriculum(
    encoder: Encoder,
    learner: Learner,
    curriculum: Curriculum,
    train: &[Sample],
    test: &[Sample],
    options: RunOptions,
) -> Result<(RunResult, Learner)> {
    ScenarioRunner::new(encoder, learner, curriculum, train, test, options)?.run_to_end()
}
