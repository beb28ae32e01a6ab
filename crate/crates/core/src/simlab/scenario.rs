//! Simulation scenarios and their line-oriented `key = value` files.

use std::fmt::Write as _;
use std::str::FromStr;

use super::SimlabError;

/// Classifiers compared in the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Md,
    Ldwd,
    Rdwd,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Md, Method::Ldwd, Method::Rdwd];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Md => "md",
            Method::Ldwd => "ldwd",
            Method::Rdwd => "rdwd",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" => Ok(Method::Md),
            "ldwd" => Ok(Method::Ldwd),
            "rdwd" => Ok(Method::Rdwd),
            other => Err(format!("unknown method `{other}` (expected md, ldwd or rdwd)")),
        }
    }
}

/// Which class the fresh test samples come from. `Both` draws `n_test` from
/// each class, giving false-positive and false-negative rates from the same
/// training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestClass {
    Pos,
    Neg,
    Both,
}

impl TestClass {
    pub fn name(&self) -> &'static str {
        match self {
            TestClass::Pos => "pos",
            TestClass::Neg => "neg",
            TestClass::Both => "both",
        }
    }

    pub fn draws_pos(&self) -> bool {
        matches!(self, TestClass::Pos | TestClass::Both)
    }

    pub fn draws_neg(&self) -> bool {
        matches!(self, TestClass::Neg | TestClass::Both)
    }
}

impl FromStr for TestClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" | "+1" => Ok(TestClass::Pos),
            "neg" | "-1" => Ok(TestClass::Neg),
            "both" => Ok(TestClass::Both),
            other => Err(format!("unknown test class `{other}` (expected pos, neg or both)")),
        }
    }
}

/// The dimensions of the full simulation grid.
pub const FULL_DIMS: [usize; 9] = [10, 50, 100, 500, 1000, 5000, 10_000, 50_000, 100_000];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentScenario {
    pub name: String,
    /// Symmetric Dirichlet parameter of the +1 class.
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub dims: Vec<usize>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_test: usize,
    pub test_class: TestClass,
    pub replications: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl ExperimentScenario {
    /// Desk-scale case 1: flat +1 class, −1 class near the vertices.
    pub fn case1_desk() -> Self {
        Self {
            name: "case1-desk".into(),
            alpha_plus: 1.0,
            alpha_minus: 0.1,
            dims: vec![10, 100, 1000],
            n_pos: 20,
            n_neg: 50,
            n_test: 500,
            test_class: TestClass::Both,
            replications: 10,
            seed: 1,
            methods: Method::ALL.to_vec(),
        }
    }

    /// Desk-scale case 2: the −1 class closer to the center.
    pub fn case2_desk() -> Self {
        Self {
            name: "case2-desk".into(),
            alpha_minus: 0.5,
            seed: 2,
            ..Self::case1_desk()
        }
    }

    /// Same classes on the full grid: nine dimensions up to 100000, 5000
    /// test samples per class, 30 replications.
    pub fn full(&self) -> Self {
        Self {
            dims: FULL_DIMS.to_vec(),
            n_test: 5000,
            replications: 30,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimlabError> {
        let bad = |msg: String| Err(SimlabError::InvalidScenario(msg));
        for (key, a) in [("alpha_plus", self.alpha_plus), ("alpha_minus", self.alpha_minus)] {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("{key} must be positive, got {a}"));
            }
        }
        if self.dims.is_empty() {
            return bad("dims must not be empty".into());
        }
        if self.dims.contains(&0) {
            return bad("dims must be positive".into());
        }
        if self.dims.windows(2).any(|w| w[0] >= w[1]) {
            return bad("dims must be strictly ascending".into());
        }
        if self.n_pos == 0 || self.n_neg == 0 {
            return bad("both training classes need at least one sample".into());
        }
        if self.n_test == 0 {
            return bad("n_test must be positive".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Every key except
    /// `name` and `methods` is required.
    pub fn parse(text: &str) -> Result<Self, SimlabError> {
        let mut name = None;
        let mut alpha_plus = None;
        let mut alpha_minus = None;
        let mut dims = None;
        let mut n_pos = None;
        let mut n_neg = None;
        let mut n_test = None;
        let mut test_class = None;
        let mut replications = None;
        let mut seed = None;
        let mut methods = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SimlabError::Parse {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            fn num<T: FromStr>(value: &str) -> Result<T, String> {
                value.parse().map_err(|_| format!("cannot parse `{value}` as a number"))
            }
            fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
            where
                T::Err: std::fmt::Display,
            {
                value
                    .split(',')
                    .map(|v| v.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", v.trim())))
                    .collect()
            }
            let parsed: Result<(), String> = (|| {
                match key {
                    "name" => name = Some(value.to_string()),
                    "alpha_plus" => alpha_plus = Some(num::<f64>(value)?),
                    "alpha_minus" => alpha_minus = Some(num::<f64>(value)?),
                    "dims" => dims = Some(list::<usize>(value)?),
                    "n_pos" => n_pos = Some(num::<usize>(value)?),
                    "n_neg" => n_neg = Some(num::<usize>(value)?),
                    "n_test" => n_test = Some(num::<usize>(value)?),
                    "test_class" => test_class = Some(value.parse::<TestClass>()?),
                    "replications" => replications = Some(num::<usize>(value)?),
                    "seed" => seed = Some(num::<u64>(value)?),
                    "methods" => methods = Some(list::<Method>(value)?),
                    other => return Err(format!("unknown key `{other}`")),
                }
                Ok(())
            })();
            parsed.map_err(err)?;
        }
        let missing = |key: &str| SimlabError::Parse {
            line: 0,
            message: format!("missing key `{key}`"),
        };
        let scenario = Self {
            name: name.unwrap_or_else(|| "scenario".into()),
            alpha_plus: alpha_plus.ok_or_else(|| missing("alpha_plus"))?,
            alpha_minus: alpha_minus.ok_or_else(|| missing("alpha_minus"))?,
            dims: dims.ok_or_else(|| missing("dims"))?,
            n_pos: n_pos.ok_or_else(|| missing("n_pos"))?,
            n_neg: n_neg.ok_or_else(|| missing("n_neg"))?,
            n_test: n_test.ok_or_else(|| missing("n_test"))?,
            test_class: test_class.ok_or_else(|| missing("test_class"))?,
            replications: replications.ok_or_else(|| missing("replications"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            methods: methods.unwrap_or_else(|| Method::ALL.to_vec()),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "alpha_plus = {}", self.alpha_plus);
        let _ = writeln!(s, "alpha_minus = {}", self.alpha_minus);
        let _ = writeln!(s, "dims = {}", join(self.dims.iter().map(|d| d.to_string()).collect()));
        let _ = writeln!(s, "n_pos = {}", self.n_pos);
        let _ = writeln!(s, "n_neg = {}", self.n_neg);
        let _ = writeln!(s, "n_test = {}", self.n_test);
        let _ = writeln!(s, "test_class = {}", self.test_class.name());
        let _ = writeln!(s, "replications = {}", self.replications);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(
            s,
            "methods = {}",
            join(self.methods.iter().map(|m| m.name().to_string()).collect())
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for sc in [ExperimentScenario::case1_desk(), ExperimentScenario::case2_desk()] {
            assert_eq!(ExperimentScenario::parse(&sc.to_text()).unwrap(), sc);
        }
    }

    #[test]
    fn comments_and_defaults() {
        let text = "# case\nalpha_plus = 1\nalpha_minus = 0.1 # vertices\ndims = 10, 20\n\
                    n_pos = 3\nn_neg = 4\nn_test = 5\ntest_class = neg\nreplications = 2\nseed = 7\n";
        let sc = ExperimentScenario::parse(text).unwrap();
        assert_eq!(sc.dims, vec![10, 20]);
        assert_eq!(sc.test_class, TestClass::Neg);
        assert_eq!(sc.methods, Method::ALL.to_vec());
    }

    #[test]
    fn errors_name_the_line() {
        let text = "alpha_plus = 1\nalpha_minus = x\n";
        match ExperimentScenario::parse(text) {
            Err(SimlabError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ExperimentScenario::parse("bogus = 1\n"),
            Err(SimlabError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut sc = ExperimentScenario::case1_desk();
        sc.replications = 0;
        assert!(sc.validate().is_err());
        let mut sc = ExperimentScenario::case1_desk();
        sc.dims = vec![100, 10];
        assert!(sc.validate().is_err());
    }

    #[test]
    fn full_grid() {
        let full = ExperimentScenario::case1_desk().full();
        assert_eq!(*full.dims.last().unwrap(), 100_000);
        assert_eq!(full.replications, 30);
        assert_eq!(full.n_test, 5000);
    }
}
