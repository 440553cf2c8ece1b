//! Generators for the three benchmark families.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Constraint, MilpInstance, Relation, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(rename = "setcover")]
    SetCover,
    Auction,
    Cfl,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SetCover => "setcover",
            Family::Auction => "auction",
            Family::Cfl => "cfl",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "setcover" => Ok(Family::SetCover),
            "auction" => Ok(Family::Auction),
            "cfl" => Ok(Family::Cfl),
            other => Err(Error::invalid(format!(
                "unknown family `{other}` (expected setcover, auction or cfl)"
            ))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Scale parameters of one family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyParams {
    #[serde(rename = "setcover")]
    SetCover { rows: usize, cols: usize, density: f64 },
    Auction { items: usize, bids: usize },
    Cfl { customers: usize, facilities: usize, capacity_ratio: f64 },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::SetCover { .. } => Family::SetCover,
            FamilyParams::Auction { .. } => Family::Auction,
            FamilyParams::Cfl { .. } => Family::Cfl,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<MilpInstance> {
        match *self {
            FamilyParams::SetCover {
                rows,
                cols,
                density,
            } => generate_set_covering(rows, cols, density, seed),
            FamilyParams::Auction { items, bids } => {
                generate_combinatorial_auction(items, bids, seed)
            }
            FamilyParams::Cfl {
                customers,
                facilities,
                capacity_ratio,
            } => generate_cap_facility_location(customers, facilities, capacity_ratio, seed),
        }
    }

    /// Short scale label, e.g. `60x120`.
    pub fn scale_label(&self) -> String {
        match *self {
            FamilyParams::SetCover { rows, cols, .. } => format!("{rows}x{cols}"),
            FamilyParams::Auction { items, bids } => format!("{items}x{bids}"),
            FamilyParams::Cfl {
                customers,
                facilities,
                ..
            } => format!("{customers}x{facilities}"),
        }
    }

    /// Desk-scale presets. `tiny` is small enough for exhaustive enumeration;
    /// each later preset is one scale step larger than the previous one.
    pub fn preset(family: Family, preset: &str) -> Result<Self> {
        let p = match (family, preset) {
            (Family::SetCover, "tiny") => FamilyParams::SetCover {
                rows: 8,
                cols: 16,
                density: 0.2,
            },
            (Family::SetCover, "easy") => FamilyParams::SetCover {
                rows: 60,
                cols: 120,
                density: 0.05,
            },
            (Family::SetCover, "medium") => FamilyParams::SetCover {
                rows: 90,
                cols: 180,
                density: 0.05,
            },
            (Family::Auction, "tiny") => FamilyParams::Auction { items: 10, bids: 15 },
            (Family::Auction, "easy") => FamilyParams::Auction { items: 25, bids: 50 },
            (Family::Auction, "medium") => FamilyParams::Auction { items: 40, bids: 80 },
            (Family::Cfl, "tiny") => FamilyParams::Cfl {
                customers: 8,
                facilities: 5,
                capacity_ratio: 1.5,
            },
            (Family::Cfl, "easy") => FamilyParams::Cfl {
                customers: 15,
                facilities: 8,
                capacity_ratio: 1.5,
            },
            (Family::Cfl, "medium") => FamilyParams::Cfl {
                customers: 25,
                facilities: 12,
                capacity_ratio: 1.5,
            },
            (_, other) => {
                return Err(Error::invalid(format!(
                    "unknown preset `{other}` (expected tiny, easy or medium)"
                )))
            }
        };
        Ok(p)
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn binary_vars(n: usize) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    (vec![0.0; n], vec![1.0; n], vec![true; n])
}

/// Balas–Ho style set covering: `min c·x, A x >= 1, x binary`.
///
/// Each entry of `A` is present with probability `density`; rows with fewer
/// than two covering columns and empty columns are repaired afterwards so the
/// instance is feasible and every column matters.
pub fn generate_set_covering(
    rows: usize,
    cols: usize,
    density: f64,
    seed: u64,
) -> Result<MilpInstance> {
    if rows < 2 || cols < 2 {
        return Err(Error::invalid(format!(
            "set covering needs rows >= 2 and cols >= 2 (got {rows}x{cols})"
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::invalid(format!(
            "set covering density must lie in (0, 1], got {density}"
        )));
    }
    let mut rng = rng_for(seed);
    let mut member = vec![vec![false; cols]; rows];
    for row in member.iter_mut() {
        for cell in row.iter_mut() {
            *cell = rng.gen::<f64>() < density;
        }
    }
    for row in member.iter_mut() {
        while row.iter().filter(|&&b| b).count() < 2 {
            let j = rng.gen_range(0..cols);
            row[j] = true;
        }
    }
    for j in 0..cols {
        if !member.iter().any(|row| row[j]) {
            let i = rng.gen_range(0..rows);
            member[i][j] = true;
        }
    }
    let obj: Vec<f64> = (0..cols).map(|_| rng.gen_range(1..=100) as f64).collect();
    let cons = member
        .iter()
        .map(|row| {
            let entries = row
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(j, _)| (j, 1.0))
                .collect();
            Constraint::new(entries, Relation::Ge, 1.0)
        })
        .collect();
    let (var_lb, var_ub, is_integer) = binary_vars(cols);
    Ok(MilpInstance {
        name: format!("setcover-{rows}x{cols}-s{seed}"),
        sense: Sense::Minimize,
        num_vars: cols,
        num_cons: rows,
        obj,
        cons,
        var_lb,
        var_ub,
        is_integer,
        seed,
    })
}

/// Winner determination for a combinatorial auction: one binary per bid,
/// one `<= 1` packing row per item, maximize accepted bid value.
///
/// Bundles are uniform random item subsets whose size is geometric with
/// mean 3; a bid's price is the sum of its items' base values times a
/// uniform factor in `[0.9, 1.1]`.
pub fn generate_combinatorial_auction(items: usize, bids: usize, seed: u64) -> Result<MilpInstance> {
    if items < 1 || bids < 1 {
        return Err(Error::invalid(format!(
            "auction needs items >= 1 and bids >= 1 (got {items} items, {bids} bids)"
        )));
    }
    let mut rng = rng_for(seed);
    let base: Vec<f64> = (0..items).map(|_| rng.gen_range(1.0..100.0)).collect();
    let mut item_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); items];
    let mut obj = Vec::with_capacity(bids);
    for b in 0..bids {
        // geometric on {1, 2, ...} with success probability 1/3
        let mut size = 1;
        while size < items && rng.gen::<f64>() >= 1.0 / 3.0 {
            size += 1;
        }
        let mut bundle = sample(&mut rng, items, size).into_vec();
        bundle.sort_unstable();
        let value: f64 = bundle.iter().map(|&i| base[i]).sum();
        let price = value * rng.gen_range(0.9..=1.1);
        for &i in &bundle {
            item_rows[i].push((b, 1.0));
        }
        obj.push(-price);
    }
    let cons = item_rows
        .into_iter()
        .map(|entries| Constraint::new(entries, Relation::Le, 1.0))
        .collect();
    let (var_lb, var_ub, is_integer) = binary_vars(bids);
    Ok(MilpInstance {
        name: format!("auction-{items}x{bids}-s{seed}"),
        sense: Sense::Maximize,
        num_vars: bids,
        num_cons: items,
        obj,
        cons,
        var_lb,
        var_ub,
        is_integer,
        seed,
    })
}

/// Index of assignment variable `x_{jk}` in a facility-location instance.
pub(crate) fn cfl_assign_index(facilities: usize, customer: usize, facility: usize) -> usize {
    facilities + customer * facilities + facility
}

/// Capacitated facility location in the Cornuejols style.
///
/// Variables `y_k` (binary, first `facilities` columns) open facilities and
/// `x_{jk}` in `[0, 1]` is the fraction of customer `j`'s demand served by
/// facility `k`. Rows: `Σ_k x_{jk} = 1` per customer, then
/// `Σ_j d_j x_{jk} - u_k y_k <= 0` per facility.
pub fn generate_cap_facility_location(
    customers: usize,
    facilities: usize,
    capacity_ratio: f64,
    seed: u64,
) -> Result<MilpInstance> {
    if customers < 1 || facilities < 1 {
        return Err(Error::invalid(format!(
            "facility location needs customers >= 1 and facilities >= 1 (got {customers}x{facilities})"
        )));
    }
    if !(capacity_ratio > 1.0 && capacity_ratio.is_finite()) {
        return Err(Error::invalid(format!(
            "capacity ratio must exceed 1, got {capacity_ratio}"
        )));
    }
    let mut rng = rng_for(seed);
    let cust_pts: Vec<(f64, f64)> = (0..customers).map(|_| (rng.gen(), rng.gen())).collect();
    let fac_pts: Vec<(f64, f64)> = (0..facilities).map(|_| (rng.gen(), rng.gen())).collect();
    let demand: Vec<f64> = (0..customers).map(|_| rng.gen_range(5..=35) as f64).collect();
    let raw_cap: Vec<f64> = (0..facilities).map(|_| rng.gen_range(10.0..160.0)).collect();
    let opening: Vec<f64> = (0..facilities).map(|_| rng.gen_range(100..=200) as f64).collect();

    let total_demand: f64 = demand.iter().sum();
    let raw_total: f64 = raw_cap.iter().sum();
    let scale = capacity_ratio * total_demand / raw_total;
    let capacity: Vec<f64> = raw_cap.iter().map(|c| c * scale).collect();

    let n = facilities + customers * facilities;
    let mut obj = vec![0.0; n];
    obj[..facilities].copy_from_slice(&opening);
    for (j, &(cx, cy)) in cust_pts.iter().enumerate() {
        for (k, &(fx, fy)) in fac_pts.iter().enumerate() {
            let dist = ((cx - fx).powi(2) + (cy - fy).powi(2)).sqrt();
            obj[cfl_assign_index(facilities, j, k)] = 10.0 * dist * demand[j];
        }
    }

    let mut cons = Vec::with_capacity(customers + facilities);
    for j in 0..customers {
        let entries = (0..facilities)
            .map(|k| (cfl_assign_index(facilities, j, k), 1.0))
            .collect();
        cons.push(Constraint::new(entries, Relation::Eq, 1.0));
    }
    for k in 0..facilities {
        let mut entries = vec![(k, -capacity[k])];
        entries.extend((0..customers).map(|j| (cfl_assign_index(facilities, j, k), demand[j])));
        cons.push(Constraint::new(entries, Relation::Le, 0.0));
    }

    let var_lb = vec![0.0; n];
    let var_ub = vec![1.0; n];
    let mut is_integer = vec![false; n];
    is_integer[..facilities].iter_mut().for_each(|b| *b = true);
    Ok(MilpInstance {
        name: format!("cfl-{customers}x{facilities}-s{seed}"),
        sense: Sense::Minimize,
        num_vars: n,
        num_cons: customers + facilities,
        obj,
        cons,
        var_lb,
        var_ub,
        is_integer,
        seed,
    })
}
