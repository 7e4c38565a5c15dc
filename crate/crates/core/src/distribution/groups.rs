use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::features::FeatureMap;
use crate::ssat::{Assignment, Clause, Var};

/// One category per protected attribute, with the matching assignment of
/// every protected variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompoundGroup {
    members: Vec<(String, String)>,
    assignment: Vec<(Var, bool)>,
}

impl CompoundGroup {
    /// `(attribute, category)` pairs, attributes sorted by name.
    pub fn members(&self) -> &[(String, String)] {
        &self.members
    }

    pub fn assignment(&self) -> &[(Var, bool)] {
        &self.assignment
    }

    pub fn to_assignment(&self) -> Assignment {
        self.assignment.iter().copied().collect()
    }

    pub fn contains(&self, row: &[bool]) -> bool {
        self.assignment.iter().all(|&(v, b)| row[v.index()] == b)
    }
}

impl fmt::Display for CompoundGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, c)) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}={c}")?;
        }
        Ok(())
    }
}

impl Serialize for CompoundGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.members.len()))?;
        for (a, c) in &self.members {
            m.serialize_entry(a, c)?;
        }
        m.end()
    }
}

/// Every compound group: the Cartesian product of protected categories,
/// attributes ordered by name and categories by name, the first attribute
/// varying slowest.
pub fn enumerate_groups(map: &FeatureMap) -> Vec<CompoundGroup> {
    let mut attrs: Vec<_> = map.attributes().iter().filter(|a| a.protected).collect();
    attrs.sort_by(|a, b| a.name.cmp(&b.name));
    let mut groups = vec![CompoundGroup {
        members: Vec::new(),
        assignment: Vec::new(),
    }];
    for a in attrs {
        let mut cats = a.categories();
        cats.sort_by(|x, y| x.0.cmp(&y.0));
        let vars = &a.vars();
        let cats = &cats;
        groups = groups
            .into_iter()
            .flat_map(|g| {
                cats.iter().map(move |(c, lit)| {
                    let mut g = g.clone();
                    g.members.push((a.name.clone(), c.clone()));
                    g.assignment.extend(vars.iter().map(|&v| {
                        let on = if v == lit.var() { lit.polarity() } else { false };
                        (v, on)
                    }));
                    g
                })
            })
            .collect::<Vec<_>>();
    }
    for g in &mut groups {
        g.assignment.sort();
    }
    groups
}

/// One unit clause per protected variable fixing it to the group's value.
pub fn group_to_unit_clauses(group: &CompoundGroup) -> Vec<Clause> {
    group
        .assignment
        .iter()
        .map(|&(v, b)| Clause::unit(v.lit(b)))
        .collect()
}

/// The group whose assignment agrees with `assignment` on every protected
/// variable, if any.
pub fn group_of(map: &FeatureMap, assignment: &Assignment) -> Option<CompoundGroup> {
    enumerate_groups(map)
        .into_iter()
        .find(|g| g.assignment.iter().all(|&(v, b)| assignment.get(v) == Some(b)))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::distribution::{discretize, AttributeSpec, RawTable, Schema};

    fn map(attrs: Vec<AttributeSpec>, csv: &str) -> FeatureMap {
        let schema = Schema {
            label: "y".into(),
            positive_label: None,
            attributes: attrs,
        };
        let t = RawTable::from_reader(csv.as_bytes()).unwrap();
        discretize(&t, &schema, &BTreeMap::new(), None).unwrap().1
    }

    fn race_sex() -> FeatureMap {
        map(
            vec![
                AttributeSpec::categorical("sex", &["male", "female"]).protected().binary(),
                AttributeSpec::categorical("race", &["White", "Colour", "Asian"]).protected(),
            ],
            "race,sex,y\nWhite,male,1\n",
        )
    }

    #[test]
    fn six_groups_in_order() {
        let groups = enumerate_groups(&race_sex());
        let names: Vec<String> = groups.iter().map(|g| g.to_string()).collect();
        assert_eq!(
            names,
            [
                "race=Asian, sex=female",
                "race=Asian, sex=male",
                "race=Colour, sex=female",
                "race=Colour, sex=male",
                "race=White, sex=female",
                "race=White, sex=male",
            ]
        );
    }

    #[test]
    fn unit_clauses() {
        let m = race_sex();
        let groups = enumerate_groups(&m);
        let lit = |name: &str| m.lookup(name).unwrap();
        // sex=female resolves to ¬(sex=male)
        let asian_female = group_to_unit_clauses(&groups[0]);
        assert_eq!(asian_female.len(), 4);
        for name in ["race=Asian", "race=Colour", "race=White", "sex=female"] {
            let l = lit(name);
            let want = if name == "race=Asian" || name == "sex=female" { l } else { !l };
            assert!(asian_female.contains(&Clause::unit(want)), "{name}");
        }
    }

    #[test]
    fn binary_attributes() {
        let m = map(
            vec![
                AttributeSpec::categorical("a", &["0", "1"]).protected().binary(),
                AttributeSpec::categorical("c", &["0", "1"]).protected().binary(),
                AttributeSpec::categorical("b", &["0", "1"]).protected().binary(),
            ],
            "a,b,c,y\n0,0,0,1\n",
        );
        let groups = enumerate_groups(&m);
        assert_eq!(groups.len(), 8);
        assert_eq!(groups[1].to_string(), "a=0, b=0, c=1");
        assert_eq!(groups[7].to_string(), "a=1, b=1, c=1");
    }

    #[test]
    fn each_row_in_exactly_one_group() {
        let m = race_sex();
        let groups = enumerate_groups(&m);
        for g in &groups {
            let row: Vec<bool> = (0..m.num_vars() as usize)
                .map(|i| g.assignment().iter().any(|&(v, b)| v.index() == i && b))
                .collect();
            assert_eq!(groups.iter().filter(|h| h.contains(&row)).count(), 1);
            assert_eq!(group_of(&m, &g.to_assignment()).as_ref(), Some(g));
        }
    }
}
