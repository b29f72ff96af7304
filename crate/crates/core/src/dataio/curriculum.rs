use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::DatasetSplit;
use crate::error::{NnaError, Result};
use crate::rng;

/// Learning modality of a curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SingleTask,
    TaskIncremental,
    ClassIncremental,
}

impl Scenario {
    pub fn tag(self) -> &'static str {
        match self {
            Scenario::SingleTask => "single-task",
            Scenario::TaskIncremental => "task-il",
            Scenario::ClassIncremental => "class-il",
        }
    }
}

/// How an episode draws from its task's training samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// A fresh seeded permutation per epoch.
    #[default]
    Permutation,
    /// Independent uniform draws.
    WithReplacement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: usize,
    pub classes: Vec<usize>,
}

/// Ordered tasks plus everything needed to reproduce their sample streams.
#[derive(Debug, Clone)]
pub struct Curriculum {
    pub scenario: Scenario,
    pub tasks: Vec<TaskSpec>,
    pub epochs: f64,
    pub shuffle_seed: u64,
    pub sampling: Sampling,
    /// Indices into the split's training samples, one list per task.
    task_train: Vec<Vec<usize>>,
}

/// `count` consecutive class groups of size `group`: `(0..g), (g..2g), ...`.
pub fn consecutive_groups(class_count: usize, group: usize) -> Vec<Vec<usize>> {
    (0..class_count)
        .collect::<Vec<_>>()
        .chunks(group.max(1))
        .map(<[usize]>::to_vec)
        .collect()
}

/// Build a curriculum over `split.train`.
///
/// For [`Scenario::SingleTask`] an empty `partition` means one task holding
/// every class; a non-empty one must consist of exactly one class set.
pub fn build_curriculum(
    split: &DatasetSplit,
    scenario: Scenario,
    partition: &[Vec<usize>],
    epochs: f64,
    seed: u64,
) -> Result<Curriculum> {
    if !(epochs > 0.0 && epochs.is_finite()) {
        return Err(NnaError::InvalidConfig(format!("epochs must be > 0, got {epochs}")));
    }
    let groups: Vec<Vec<usize>> = if partition.is_empty() {
        vec![(0..split.class_count).collect()]
    } else {
        partition.to_vec()
    };
    if scenario == Scenario::SingleTask && groups.len() != 1 {
        return Err(NnaError::InvalidConfig(
            "single-task curriculum takes exactly one class set".into(),
        ));
    }

    let mut owner = vec![None; split.class_count];
    for (t, classes) in groups.iter().enumerate() {
        if classes.is_empty() {
            return Err(NnaError::EmptyTask(t));
        }
        for &c in classes {
            if c >= split.class_count {
                return Err(NnaError::LabelOutOfRange {
                    label: c,
                    classes: split.class_count,
                });
            }
            if owner[c].replace(t).is_some() {
                return Err(NnaError::OverlappingTasks(c));
            }
        }
    }

    let mut task_train = vec![Vec::new(); groups.len()];
    for (i, s) in split.train.iter().enumerate() {
        if let Some(t) = owner[s.label] {
            task_train[t].push(i);
        }
    }
    if let Some(t) = task_train.iter().position(Vec::is_empty) {
        return Err(NnaError::EmptyTask(t));
    }

    Ok(Curriculum {
        scenario,
        tasks: groups
            .into_iter()
            .enumerate()
            .map(|(task_id, classes)| TaskSpec { task_id, classes })
            .collect(),
        epochs,
        shuffle_seed: seed,
        sampling: Sampling::Permutation,
        task_train,
    })
}

impl Curriculum {
    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    /// Training-set indices belonging to task `pos` (in dataset order).
    pub fn task_samples(&self, pos: usize) -> &[usize] {
        &self.task_train[pos]
    }

    /// Number of streamed iterations for task `pos`: `floor(n * epochs)`.
    pub fn iterations(&self, pos: usize) -> usize {
        (self.task_train[pos].len() as f64 * self.epochs).floor() as usize
    }

    pub fn total_iterations(&self) -> usize {
        (0..self.tasks.len()).map(|p| self.iterations(p)).sum()
    }

    /// The ordered training-set indices streamed during episode `pos`.
    pub fn episode_stream(&self, pos: usize) -> Vec<usize> {
        let pool = &self.task_train[pos];
        let n_iter = self.iterations(pos);
        let mut rng = rng::seeded(self.shuffle_seed, pos as u64);
        match self.sampling {
            Sampling::Permutation => {
                let mut out = Vec::with_capacity(n_iter);
                while out.len() < n_iter {
                    let mut perm = pool.clone();
                    perm.shuffle(&mut rng);
                    let take = (n_iter - out.len()).min(perm.len());
                    out.extend_from_slice(&perm[..take]);
                }
                out
            }
            Sampling::WithReplacement => (0..n_iter)
                .map(|_| pool[rng.gen_range(0..pool.len())])
                .collect(),
        }
    }

    /// Every class appearing in any task, in task order.
    pub fn all_classes(&self) -> Vec<usize> {
        self.tasks.iter().flat_map(|t| t.classes.iter().copied()).collect()
    }
}
