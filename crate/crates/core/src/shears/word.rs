use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Direction, Kind, Profile, ShearGenerator};
use crate::error::{Error, Result};

type C = Complex64;

/// Coordinates larger than this abort word evaluation.
pub const OVERFLOW_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct WordEntry {
    pub generator: ShearGenerator,
    pub time: f64,
}

/// Finite composition of generator time-t maps, applied first entry first.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AutomorphismWord {
    entries: Vec<WordEntry>,
}

impl AutomorphismWord {
    pub fn new(entries: Vec<WordEntry>) -> Self {
        AutomorphismWord { entries }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, generator: ShearGenerator, time: f64) {
        self.entries.push(WordEntry { generator, time });
    }

    pub fn extend(&mut self, other: &AutomorphismWord) {
        self.entries.extend(other.entries.iter().cloned());
    }

    pub fn entries(&self) -> &[WordEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Applies the word to `z`, failing if any coordinate leaves the
    /// [`OVERFLOW_LIMIT`] ball or becomes non-finite.
    pub fn eval(&self, z: &[C]) -> Result<Vec<C>> {
        let mut z = z.to_vec();
        for (i, e) in self.entries.iter().enumerate() {
            if e.generator.n() != z.len() {
                return Err(Error::DimensionMismatch {
                    expected: e.generator.n(),
                    got: z.len(),
                });
            }
            z = e.generator.flow(e.time, &z);
            let m = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if !(m <= OVERFLOW_LIMIT) {
                return Err(Error::Overflow {
                    entry: i,
                    magnitude: m,
                });
            }
        }
        Ok(z)
    }

    /// Reversed order with negated times.
    pub fn invert(&self) -> Self {
        AutomorphismWord {
            entries: self
                .entries
                .iter()
                .rev()
                .map(|e| WordEntry {
                    generator: e.generator.clone(),
                    time: -e.time,
                })
                .collect(),
        }
    }

    /// Complex Jacobian determinant at `z`, from the closed forms of each entry.
    pub fn jacobian_det(&self, z: &[C]) -> C {
        let mut z = z.to_vec();
        let mut det = C::new(1.0, 0.0);
        for e in &self.entries {
            det *= e.generator.jacobian_det(e.time, &z);
            z = e.generator.flow(e.time, &z);
        }
        det
    }

    pub fn count_kind(&self, kind: Kind) -> usize {
        self.entries
            .iter()
            .filter(|e| e.generator.kind() == kind)
            .count()
    }
}

/// Serialized form: consecutive entries sharing a generator are grouped.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    kind: Kind,
    v: Direction,
    times: Vec<f64>,
    profile: Profile,
}

impl Serialize for AutomorphismWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut records: Vec<Record> = Vec::new();
        let mut last: Option<&ShearGenerator> = None;
        for e in &self.entries {
            match (last, records.last_mut()) {
                (Some(g), Some(r)) if *g == e.generator => r.times.push(e.time),
                _ => records.push(Record {
                    kind: e.generator.kind(),
                    v: e.generator.direction().clone(),
                    times: vec![e.time],
                    profile: e.generator.profile().clone(),
                }),
            }
            last = Some(&e.generator);
        }
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AutomorphismWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<Record>::deserialize(d)?;
        let mut entries = Vec::new();
        for r in records {
            let g =
                ShearGenerator::new(r.kind, r.v, r.profile).map_err(serde::de::Error::custom)?;
            for t in r.times {
                entries.push(WordEntry {
                    generator: g.clone(),
                    time: t,
                });
            }
        }
        Ok(AutomorphismWord { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{monomials_up_to, CPolynomial};
    use crate::shears::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_generator(rng: &mut ChaCha8Rng, n: usize) -> ShearGenerator {
        let v: Vec<C> = (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let d = Direction::new(v).unwrap();
        let terms = monomials_up_to(n - 1, 2)
            .into_iter()
            .map(|m| (m, c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))));
        let p = CPolynomial::from_terms(n - 1, terms).unwrap();
        let kind = if rng.gen_bool(0.5) {
            Kind::Shear
        } else {
            Kind::Overshear
        };
        ShearGenerator::new(kind, d, Profile::Polynomial(p)).unwrap()
    }

    fn random_ball(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<C> {
        loop {
            let z: Vec<C> = (0..n)
                .map(|_| c(rng.gen_range(-r..r), rng.gen_range(-r..r)))
                .collect();
            if norm(&z) <= r {
                return z;
            }
        }
    }

    fn max_diff(a: &[C], b: &[C]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn empty_word_is_identity() {
        let w = AutomorphismWord::empty();
        let z = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        assert_eq!(w.eval(&z).unwrap(), z);
        assert!(w.invert().is_empty());
    }

    #[test]
    fn single_entry_inverts_by_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_generator(&mut rng, 2);
        let mut w = AutomorphismWord::empty();
        w.push(g.clone(), 0.7);
        let inv = w.invert();
        assert_eq!(
            inv.entries(),
            &[WordEntry {
                generator: g,
                time: -0.7
            }]
        );
    }

    #[test]
    fn random_words_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..4 {
            let mut w = AutomorphismWord::empty();
            for _ in 0..10 {
                let g = random_generator(&mut rng, n);
                w.push(g, rng.gen_range(-1.0..1.0));
            }
            let inv = w.invert();
            for _ in 0..100 {
                let z = random_ball(&mut rng, n, 2.0);
                let back = inv.eval(&w.eval(&z).unwrap()).unwrap();
                assert!(max_diff(&back, &z) <= 1e-9);
            }
        }
    }

    #[test]
    fn same_direction_shears_add_times() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut g = random_generator(&mut rng, 3);
        while g.kind() != Kind::Shear {
            g = random_generator(&mut rng, 3);
        }
        let mut w = AutomorphismWord::empty();
        w.push(g.clone(), 0.3);
        w.push(g.clone(), -0.8);
        for _ in 0..100 {
            let z = random_ball(&mut rng, 3, 2.0);
            assert!(max_diff(&w.eval(&z).unwrap(), &g.flow(-0.5, &z)) <= 1e-10);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let g =
            ShearGenerator::overshear(Direction::axis(2, 1), CPolynomial::constant(1, c(1.0, 0.0)))
                .unwrap();
        let mut w = AutomorphismWord::empty();
        w.push(g.clone(), 1.0);
        w.push(g, 40.0);
        match w.eval(&[c(0.0, 0.0), c(1.0, 0.0)]) {
            Err(Error::Overflow { entry, .. }) => assert_eq!(entry, 1),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn json_groups_runs_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_generator(&mut rng, 2);
        let b = random_generator(&mut rng, 2);
        let mut w = AutomorphismWord::empty();
        w.push(a.clone(), 0.1);
        w.push(a.clone(), 0.2);
        w.push(b, 0.3);
        w.push(a, 0.4);
        let s = serde_json::to_string(&w).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 3);
        assert_eq!(arr[0]["times"].as_array().unwrap().len(), 2);
        for key in ["kind", "v", "times", "profile"] {
            assert!(arr[0].get(key).is_some());
        }
        let back: AutomorphismWord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let s = r#"[{"kind":"shear","v":[[1,0],[0,0]],"times":[1],"profile":{"polynomial":{"n_vars":1,"terms":[]}},"extra":1}]"#;
        assert!(serde_json::from_str::<AutomorphismWord>(s).is_err());
    }
}
