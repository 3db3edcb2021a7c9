//! Random instance generation and lecturer preference derivation.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, Lecturer, LecturerId, Project, ProjectId, Student, StudentId};

/// Length of each generated student list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefLen {
    /// Uniform in `[min, max]`.
    Range(usize, usize),
    Exact(usize),
}

impl PrefLen {
    pub fn min(self) -> usize {
        match self {
            Self::Range(lo, _) => lo,
            Self::Exact(x) => x,
        }
    }

    pub fn max(self) -> usize {
        match self {
            Self::Range(_, hi) => hi,
            Self::Exact(x) => x,
        }
    }
}

impl fmt::Display for PrefLen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Range(lo, hi) => write!(f, "{lo}-{hi}"),
            Self::Exact(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for PrefLen {
    type Err = String;

    /// `"3"` or `"2-5"`.
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad preference length `{s}`"))
        };
        match s.split_once('-') {
            Some((lo, hi)) => Ok(Self::Range(num(lo)?, num(hi)?)),
            None => Ok(Self::Exact(num(s)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n1: usize,
    pub project_ratio: f64,
    pub lecturer_ratio: f64,
    pub capacity_ratio: f64,
    pub pref_len: PrefLen,
    pub seed: u64,
    /// Explicit project count, overriding `project_ratio`.
    pub n2: Option<usize>,
    /// Explicit lecturer count, overriding `lecturer_ratio`.
    pub n3: Option<usize>,
    /// Explicit total project capacity, overriding `capacity_ratio`.
    pub total_capacity: Option<usize>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n1: 10,
            project_ratio: 0.5,
            lecturer_ratio: 0.2,
            capacity_ratio: 1.1,
            pref_len: PrefLen::Range(2, 5),
            seed: 0,
            n2: None,
            n3: None,
            total_capacity: None,
        }
    }
}

/// Published dataset shapes `(year, n1, n2, n3, list length)`. Every
/// project in them has capacity 1.
pub const DATASET_SHAPES: [(u32, usize, usize, usize, usize); 4] = [
    (2014, 55, 149, 38, 6),
    (2015, 76, 197, 46, 6),
    (2016, 92, 214, 44, 6),
    (2017, 90, 289, 59, 4),
];

impl GenParams {
    pub fn new(n1: usize, pref_len: PrefLen, seed: u64) -> Self {
        Self {
            n1,
            pref_len,
            seed,
            ..Self::default()
        }
    }

    /// Stand-in for one of [`DATASET_SHAPES`].
    pub fn dataset(year: u32, seed: u64) -> Option<Self> {
        let &(_, n1, n2, n3, l) = DATASET_SHAPES.iter().find(|row| row.0 == year)?;
        Some(Self {
            n1,
            pref_len: PrefLen::Exact(l),
            seed,
            n2: Some(n2),
            n3: Some(n3),
            total_capacity: Some(n2),
            ..Self::default()
        })
    }

    /// `(n2, n3, total project capacity)` after rounding and overrides.
    pub fn counts(&self) -> (usize, usize, usize) {
        let scaled = |r: f64| (r * self.n1 as f64).floor() as usize;
        (
            self.n2.unwrap_or_else(|| scaled(self.project_ratio)),
            self.n3.unwrap_or_else(|| scaled(self.lecturer_ratio)),
            self.total_capacity
                .unwrap_or_else(|| scaled(self.capacity_ratio)),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Param(msg));
        for (name, r) in [
            ("project_ratio", self.project_ratio),
            ("lecturer_ratio", self.lecturer_ratio),
            ("capacity_ratio", self.capacity_ratio),
        ] {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("{name} must be positive, got {r}"));
            }
        }
        let (n2, n3, cap) = self.counts();
        if self.n1 == 0 {
            return bad("n1 must be at least 1".into());
        }
        if n2 == 0 {
            return bad(format!("n1 = {} yields no projects", self.n1));
        }
        if n3 == 0 {
            return bad(format!("n1 = {} yields no lecturers", self.n1));
        }
        if n3 > n2 {
            return bad(format!("{n3} lecturers cannot each offer one of {n2} projects"));
        }
        if cap < n2 {
            return bad(format!("total capacity {cap} is below the project count {n2}"));
        }
        let (lo, hi) = (self.pref_len.min(), self.pref_len.max());
        if lo == 0 || lo > hi {
            return bad(format!("preference length {} is empty or reversed", self.pref_len));
        }
        if hi > n2 {
            return bad(format!("preference length {hi} exceeds the project count {n2}"));
        }
        Ok(())
    }
}

/// A random instance, fully determined by `params`.
///
/// Projects get capacity 1 each and the remaining units one at a time to
/// uniformly random projects. Lecturers each receive one project from a
/// random permutation, then the rest go to uniformly random lecturers.
/// Each `d_k` is uniform between the largest and the total capacity of
/// the lecturer's projects.
pub fn generate(params: &GenParams) -> Result<Instance> {
    params.validate()?;
    let (n2, n3, total) = params.counts();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut capacity = vec![1usize; n2];
    for _ in n2..total {
        capacity[rng.random_range(0..n2)] += 1;
    }

    let mut order: Vec<usize> = (0..n2).collect();
    order.shuffle(&mut rng);
    let mut owner = vec![0usize; n2];
    for (i, &j) in order.iter().enumerate() {
        owner[j] = if i < n3 { i } else { rng.random_range(0..n3) };
    }

    let mut offered: Vec<Vec<ProjectId>> = vec![Vec::new(); n3];
    for (j, &k) in owner.iter().enumerate() {
        offered[k].push(ProjectId::new(j));
    }
    let lecturers = offered
        .into_iter()
        .enumerate()
        .map(|(k, mut prefs)| {
            let caps = prefs.iter().map(|p| capacity[p.index()]);
            let lo = caps.clone().max().expect("every lecturer offers a project");
            let hi = caps.sum::<usize>();
            let d = rng.random_range(lo..=hi);
            prefs.shuffle(&mut rng);
            Lecturer {
                id: LecturerId::new(k),
                capacity: d,
                prefs,
            }
        })
        .collect::<Vec<_>>();

    let projects = (0..n2)
        .map(|j| Project {
            id: ProjectId::new(j),
            capacity: capacity[j],
            lecturer: LecturerId::new(owner[j]),
        })
        .collect();

    let (lo, hi) = (params.pref_len.min(), params.pref_len.max());
    let students = (0..params.n1)
        .map(|i| {
            let len = rng.random_range(lo..=hi);
            let mut picks = index::sample(&mut rng, n2, len).into_vec();
            picks.shuffle(&mut rng);
            Student {
                id: StudentId::new(i),
                prefs: picks.into_iter().map(ProjectId::new).collect(),
            }
        })
        .collect();

    Instance::new(students, projects, lecturers)
}

/// How lecturers order their projects in derived instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PopularityMode {
    Random,
    /// Least popular project first.
    Ascending,
    /// Most popular project first.
    Descending,
}

impl PopularityMode {
    pub const ALL: [PopularityMode; 3] = [Self::Random, Self::Ascending, Self::Descending];

    pub fn label(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Ascending => "ascending",
            Self::Descending => "descending",
        }
    }
}

impl fmt::Display for PopularityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PopularityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(Self::Random),
            "ascending" => Ok(Self::Ascending),
            "descending" => Ok(Self::Descending),
            _ => Err(format!("unknown popularity mode `{s}`")),
        }
    }
}

/// Copy of `inst` with every lecturer list reordered by `mode`, where a
/// project's popularity is the number of students listing it. Equal
/// popularity falls back to ascending project id in both sorted modes.
/// `seed` only matters for [`PopularityMode::Random`].
pub fn derive_lecturer_prefs(inst: &Instance, mode: PopularityMode, seed: u64) -> Instance {
    let a = inst.popularity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefs = inst
        .lecturers()
        .iter()
        .map(|l| {
            let mut list = l.prefs.clone();
            match mode {
                PopularityMode::Random => list.shuffle(&mut rng),
                PopularityMode::Ascending => list.sort_by_key(|p| (a[p.index()], *p)),
                PopularityMode::Descending => {
                    list.sort_by_key(|p| (std::cmp::Reverse(a[p.index()]), *p))
                }
            }
            list
        })
        .collect();
    inst.with_lecturer_prefs(prefs)
        .expect("a permutation of valid lists is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_instance;
    use crate::model::tests::worked;

    #[test]
    fn default_ratios_at_100() {
        let inst = generate(&GenParams::new(100, PrefLen::Range(2, 5), 1)).unwrap();
        assert_eq!(inst.n_projects(), 50);
        assert_eq!(inst.n_lecturers(), 20);
        assert_eq!(inst.total_project_capacity(), 110);
    }

    #[test]
    fn exact_length() {
        let inst = generate(&GenParams::new(10, PrefLen::Exact(3), 4)).unwrap();
        assert!(inst.students().iter().all(|s| s.prefs.len() == 3));
    }

    #[test]
    fn same_seed_same_text() {
        let p = GenParams::new(40, PrefLen::Range(2, 5), 99);
        assert_eq!(
            serialize_instance(&generate(&p).unwrap()),
            serialize_instance(&generate(&p).unwrap())
        );
    }

    #[test]
    fn rejects_overlong_lists() {
        let p = GenParams::new(10, PrefLen::Exact(6), 0);
        assert!(matches!(generate(&p), Err(Error::Param(_))));
        let p = GenParams::new(4, PrefLen::Exact(1), 0);
        assert!(matches!(generate(&p), Err(Error::Param(_))));
    }

    #[test]
    fn dataset_shapes() {
        for (year, n1, n2, n3, l) in DATASET_SHAPES {
            let inst = generate(&GenParams::dataset(year, 3).unwrap()).unwrap();
            assert_eq!(
                (inst.n_students(), inst.n_projects(), inst.n_lecturers()),
                (n1, n2, n3)
            );
            assert!(inst.projects().iter().all(|p| p.capacity == 1));
            assert!(inst.students().iter().all(|s| s.prefs.len() == l));
        }
        assert!(GenParams::dataset(2013, 0).is_none());
    }

    #[test]
    fn worked_popularity_ties() {
        let inst = worked();
        assert_eq!(inst.popularity(), vec![2, 2, 2]);
        let l1 = |i: &Instance| i.lecturers()[0].prefs.clone();
        let p = |j| ProjectId::new(j);
        assert_eq!(l1(&derive_lecturer_prefs(&inst, PopularityMode::Ascending, 0)), vec![p(0), p(1)]);
        assert_eq!(l1(&derive_lecturer_prefs(&inst, PopularityMode::Descending, 0)), vec![p(0), p(1)]);
    }

    #[test]
    fn single_project_lecturer_unchanged() {
        let inst = worked();
        for mode in PopularityMode::ALL {
            let d = derive_lecturer_prefs(&inst, mode, 8);
            assert_eq!(d.lecturers()[1].prefs, inst.lecturers()[1].prefs);
        }
    }

    #[test]
    fn pref_len_parsing() {
        assert_eq!("2-5".parse::<PrefLen>().unwrap(), PrefLen::Range(2, 5));
        assert_eq!("6".parse::<PrefLen>().unwrap(), PrefLen::Exact(6));
        assert!("x".parse::<PrefLen>().is_err());
    }
}
