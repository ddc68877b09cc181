//! Text formats: the canonical TSPLIB-style format (which also reads plain
//! CVRPLIB files) and two whitespace formats for profit-based variants.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{EdgeWeight, Instance, InstanceData, InstanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    /// TSPLIB-style with profit, weight, group and service level sections.
    Vrpsl,
    /// Plain CVRPLIB file; extension sections are ignored and the CVRP
    /// reduction applied.
    Cvrplib,
    /// `n m Q f`, depot `x y`, then `x y demand outsourcing_cost` per customer.
    Vrppfcc,
    /// `n m Q`, depot `x y`, then `x y demand prize` per customer.
    Cptp,
}

impl std::str::FromStr for InstanceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vrpsl" => Ok(Self::Vrpsl),
            "cvrplib" | "cvrp" => Ok(Self::Cvrplib),
            "vrppfcc" => Ok(Self::Vrppfcc),
            "cptp" => Ok(Self::Cptp),
            other => Err(format!("unknown instance format `{other}`")),
        }
    }
}

pub fn parse_instance(text: &str, format: InstanceFormat) -> Result<Instance, InstanceError> {
    match format {
        InstanceFormat::Vrpsl => parse_tsplib(text, false),
        InstanceFormat::Cvrplib => parse_tsplib(text, true),
        InstanceFormat::Vrppfcc => parse_columns(text, true),
        InstanceFormat::Cptp => parse_columns(text, false),
    }
}

/// Writes the canonical format. Explicit matrices are written in full.
pub fn serialize_instance(inst: &Instance) -> String {
    let n = inst.n();
    let mut out = String::new();
    let _ = writeln!(out, "NAME : {}", inst.name());
    let _ = writeln!(out, "TYPE : VRPSL");
    let _ = writeln!(out, "DIMENSION : {}", n + 1);
    let _ = writeln!(out, "CAPACITY : {}", inst.capacity());
    let _ = writeln!(out, "VEHICLES : {}", inst.fleet_size());
    match inst.edge_weight() {
        EdgeWeight::Euc2d => out.push_str("EDGE_WEIGHT_TYPE : EUC_2D\n"),
        EdgeWeight::Euc2dExact => out.push_str("EDGE_WEIGHT_TYPE : EUC_2D_EXACT\n"),
        EdgeWeight::Explicit => {
            out.push_str("EDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\n");
            out.push_str("EDGE_WEIGHT_SECTION\n");
            for i in 0..=n {
                let row: Vec<String> = (0..=n).map(|j| inst.d(i, j).to_string()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
    }
    out.push_str("NODE_COORD_SECTION\n");
    for (i, c) in inst.coords().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", i + 1, c[0], c[1]);
    }
    out.push_str("DEMAND_SECTION\n");
    for i in 0..=n {
        let _ = writeln!(out, "{} {}", i + 1, inst.demand(i));
    }
    out.push_str("PROFIT_SECTION\n");
    for i in inst.customers() {
        let _ = writeln!(out, "{} {}", i + 1, inst.profit(i));
    }
    out.push_str("SERVICE_WEIGHT_SECTION\n");
    for i in inst.customers() {
        let _ = writeln!(out, "{} {}", i + 1, inst.weight(i));
    }
    out.push_str("GROUP_SECTION\n");
    for i in inst.customers() {
        let _ = writeln!(out, "{} {}", i + 1, inst.group_of(i) + 1);
    }
    out.push_str("SERVICE_LEVEL_SECTION\n");
    for k in 0..inst.group_count() {
        let _ = writeln!(out, "{} {}", k + 1, inst.service_level(k));
    }
    out.push_str("DEPOT_SECTION\n1\n-1\nEOF\n");
    out
}

/// Default service weight of a customer when none is given: its demand, or 1
/// for zero-demand customers so that full service levels still force a visit.
pub(crate) fn default_weight(demand: f64) -> f64 {
    if demand > 0.0 {
        demand
    } else {
        1.0
    }
}

#[derive(Default)]
struct Sections {
    coords: HashMap<usize, [f64; 2]>,
    demand: HashMap<usize, f64>,
    profit: Option<HashMap<usize, f64>>,
    weight: Option<HashMap<usize, f64>>,
    group: Option<HashMap<usize, usize>>,
    level: Option<HashMap<usize, f64>>,
    depots: Vec<usize>,
    matrix: Vec<f64>,
}

fn perr(line: usize, section: &str, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        section: section.to_string(),
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, section: &str) -> Result<T, InstanceError> {
    tok.parse()
        .map_err(|_| perr(line, section, format!("cannot parse `{tok}`")))
}

fn fleet_from_name(name: &str) -> Option<usize> {
    let idx = name.rfind("-k")?;
    let digits: String = name[idx + 2..].chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

fn parse_tsplib(text: &str, cvrp_only: bool) -> Result<Instance, InstanceError> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<f64> = None;
    let mut vehicles: Option<usize> = None;
    let mut edge_type: Option<EdgeWeight> = None;
    let mut sec = Sections::default();
    let mut current: Option<String> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let first = line.split_whitespace().next().unwrap();
        if first.ends_with("_SECTION") {
            let tag = first.to_string();
            match tag.as_str() {
                "NODE_COORD_SECTION" | "DEMAND_SECTION" | "DEPOT_SECTION"
                | "EDGE_WEIGHT_SECTION" => {}
                "PROFIT_SECTION" if !cvrp_only => sec.profit = Some(HashMap::new()),
                "SERVICE_WEIGHT_SECTION" if !cvrp_only => sec.weight = Some(HashMap::new()),
                "GROUP_SECTION" if !cvrp_only => sec.group = Some(HashMap::new()),
                "SERVICE_LEVEL_SECTION" if !cvrp_only => sec.level = Some(HashMap::new()),
                "PROFIT_SECTION" | "SERVICE_WEIGHT_SECTION" | "GROUP_SECTION"
                | "SERVICE_LEVEL_SECTION" | "DISPLAY_DATA_SECTION" => {}
                _ => return Err(perr(lineno, &tag, "unknown section")),
            }
            current = Some(tag);
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            if key.trim().chars().all(|c| c.is_ascii_uppercase() || c == '_') {
                let key = key.trim();
                let value = value.trim();
                current = None;
                match key {
                    "NAME" => name = value.to_string(),
                    "DIMENSION" => dimension = Some(num(value, lineno, key)?),
                    "CAPACITY" => capacity = Some(num(value, lineno, key)?),
                    "VEHICLES" => vehicles = Some(num(value, lineno, key)?),
                    "EDGE_WEIGHT_TYPE" => {
                        edge_type = Some(match value {
                            "EUC_2D" => EdgeWeight::Euc2d,
                            "EUC_2D_EXACT" => EdgeWeight::Euc2dExact,
                            "EXPLICIT" => EdgeWeight::Explicit,
                            other => {
                                return Err(perr(lineno, key, format!("unsupported type `{other}`")))
                            }
                        })
                    }
                    "EDGE_WEIGHT_FORMAT" if value != "FULL_MATRIX" => {
                        return Err(perr(lineno, key, "only FULL_MATRIX is supported"))
                    }
                    _ => {}
                }
                continue;
            }
        }
        let Some(tag) = current.as_deref() else {
            return Err(perr(lineno, "header", format!("unexpected line `{line}`")));
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let want = |k: usize| -> Result<(), InstanceError> {
            if toks.len() == k {
                Ok(())
            } else {
                Err(perr(lineno, tag, format!("expected {k} fields, found {}", toks.len())))
            }
        };
        match tag {
            "NODE_COORD_SECTION" => {
                want(3)?;
                let id = num(toks[0], lineno, tag)?;
                let c = [num(toks[1], lineno, tag)?, num(toks[2], lineno, tag)?];
                if sec.coords.insert(id, c).is_some() {
                    return Err(perr(lineno, tag, format!("node {id} listed twice")));
                }
            }
            "DEMAND_SECTION" => {
                want(2)?;
                let id = num(toks[0], lineno, tag)?;
                sec.demand.insert(id, num(toks[1], lineno, tag)?);
            }
            "DEPOT_SECTION" => {
                for t in toks {
                    let v: i64 = num(t, lineno, tag)?;
                    if v >= 1 {
                        sec.depots.push(v as usize);
                    }
                }
            }
            "EDGE_WEIGHT_SECTION" => {
                for t in toks {
                    sec.matrix.push(num(t, lineno, tag)?);
                }
            }
            "PROFIT_SECTION" | "SERVICE_WEIGHT_SECTION" | "SERVICE_LEVEL_SECTION" => {
                if cvrp_only {
                    continue;
                }
                want(2)?;
                let id: usize = num(toks[0], lineno, tag)?;
                let v: f64 = num(toks[1], lineno, tag)?;
                let map = match tag {
                    "PROFIT_SECTION" => sec.profit.as_mut(),
                    "SERVICE_WEIGHT_SECTION" => sec.weight.as_mut(),
                    _ => sec.level.as_mut(),
                }
                .unwrap();
                if map.insert(id, v).is_some() {
                    return Err(perr(lineno, tag, format!("entry {id} listed twice")));
                }
            }
            "GROUP_SECTION" => {
                if cvrp_only {
                    continue;
                }
                want(2)?;
                let id: usize = num(toks[0], lineno, tag)?;
                let g: usize = num(toks[1], lineno, tag)?;
                if g == 0 {
                    return Err(perr(lineno, tag, "group ids are 1-based"));
                }
                if sec.group.as_mut().unwrap().insert(id, g).is_some() {
                    return Err(perr(
                        lineno,
                        tag,
                        format!("customer {id} assigned to more than one group"),
                    ));
                }
            }
            _ => {}
        }
    }

    let last = text.lines().count();
    let dim = dimension.ok_or_else(|| perr(last, "header", "missing DIMENSION"))?;
    if dim < 1 {
        return Err(perr(last, "header", "DIMENSION must be at least 1"));
    }
    let capacity = capacity.ok_or_else(|| perr(last, "header", "missing CAPACITY"))?;
    let edge_weight = edge_type.unwrap_or(EdgeWeight::Euc2d);
    let depot = match sec.depots.as_slice() {
        [] => 1,
        [d] => *d,
        _ => return Err(perr(last, "DEPOT_SECTION", "exactly one depot is supported")),
    };
    if depot > dim {
        return Err(perr(last, "DEPOT_SECTION", format!("depot {depot} out of range")));
    }
    // file id -> internal index (depot first, others in id order)
    let order: Vec<usize> = std::iter::once(depot)
        .chain((1..=dim).filter(|&id| id != depot))
        .collect();
    let n = dim - 1;

    let coords: Vec<[f64; 2]> = if edge_weight == EdgeWeight::Explicit && sec.coords.is_empty() {
        vec![[0.0, 0.0]; dim]
    } else {
        order
            .iter()
            .map(|id| {
                sec.coords.get(id).copied().ok_or_else(|| {
                    perr(last, "NODE_COORD_SECTION", format!("missing coordinates of node {id}"))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut demand = Vec::with_capacity(dim);
    for (pos, id) in order.iter().enumerate() {
        let q = match sec.demand.get(id) {
            Some(&q) => q,
            None if pos == 0 => 0.0,
            None => {
                return Err(perr(last, "DEMAND_SECTION", format!("missing demand of node {id}")))
            }
        };
        demand.push(if pos == 0 { 0.0 } else { q });
    }
    let dist = if edge_weight == EdgeWeight::Explicit {
        if sec.matrix.len() != dim * dim {
            return Err(perr(
                last,
                "EDGE_WEIGHT_SECTION",
                format!("expected {} weights, found {}", dim * dim, sec.matrix.len()),
            ));
        }
        let mut d = vec![0.0; dim * dim];
        for (a, ia) in order.iter().enumerate() {
            for (b, ib) in order.iter().enumerate() {
                d[a * dim + b] = sec.matrix[(ia - 1) * dim + (ib - 1)];
            }
        }
        Some(d)
    } else {
        None
    };

    let per_customer = |map: &HashMap<usize, f64>| {
        let mut v = vec![0.0; dim];
        for (pos, id) in order.iter().enumerate().skip(1) {
            v[pos] = map[id];
        }
        v
    };

    let profit = match &sec.profit {
        Some(map) => {
            if let Some(id) = order[1..].iter().find(|id| !map.contains_key(id)) {
                return Err(perr(last, "PROFIT_SECTION", format!("missing profit of node {id}")));
            }
            per_customer(map)
        }
        None => vec![0.0; dim],
    };
    let weight = match &sec.weight {
        Some(map) => {
            if let Some(id) = order[1..].iter().find(|id| !map.contains_key(id)) {
                return Err(perr(
                    last,
                    "SERVICE_WEIGHT_SECTION",
                    format!("missing service weight of node {id}"),
                ));
            }
            per_customer(map)
        }
        None => {
            let mut w = vec![0.0; dim];
            for i in 1..dim {
                w[i] = default_weight(demand[i]);
            }
            w
        }
    };

    let (groups, service_level) = match (&sec.group, &sec.level) {
        (None, None) => (vec![(1..dim).collect::<Vec<_>>()], vec![1.0]),
        (Some(_), None) => {
            return Err(perr(last, "SERVICE_LEVEL_SECTION", "groups given without service levels"))
        }
        (None, Some(_)) => {
            return Err(perr(last, "GROUP_SECTION", "service levels given without groups"))
        }
        (Some(gmap), Some(lmap)) => {
            let k = lmap.len();
            for g in 1..=k {
                if !lmap.contains_key(&g) {
                    return Err(perr(
                        last,
                        "SERVICE_LEVEL_SECTION",
                        format!("missing service level of group {g}"),
                    ));
                }
            }
            let mut groups = vec![Vec::new(); k];
            for (pos, id) in order.iter().enumerate().skip(1) {
                let g = *gmap.get(id).ok_or_else(|| {
                    perr(last, "GROUP_SECTION", format!("customer {id} has no group"))
                })?;
                if g > k {
                    return Err(perr(
                        last,
                        "SERVICE_LEVEL_SECTION",
                        format!("missing service level of group {g}"),
                    ));
                }
                groups[g - 1].push(pos);
            }
            if let Some(depot_group) = gmap.get(&depot) {
                return Err(perr(
                    last,
                    "GROUP_SECTION",
                    format!("depot assigned to group {depot_group}"),
                ));
            }
            (groups, (1..=k).map(|g| lmap[&g]).collect())
        }
    };

    let fleet_size = vehicles.or_else(|| fleet_from_name(&name)).unwrap_or(n.max(1));

    Instance::new(InstanceData {
        name,
        coords,
        dist,
        edge_weight,
        demand,
        profit,
        weight,
        groups,
        service_level,
        fleet_size,
        capacity,
    })
}

/// Whitespace formats for profit-based variants. Lines may carry `#` comments.
/// Distances are kept in double precision. For the private-fleet variant the
/// per-vehicle fixed cost is folded into the edge costs as half of it on every
/// depot edge, so each route pays it exactly once.
fn parse_columns(text: &str, with_fixed_cost: bool) -> Result<Instance, InstanceError> {
    let section = if with_fixed_cost { "vrppfcc" } else { "cptp" };
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| num::<f64>(t, lineno + 1, section))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((lineno + 1, vals));
    }
    let last = text.lines().count();
    let (hl, header) = rows
        .first()
        .cloned()
        .ok_or_else(|| perr(last, section, "empty file"))?;
    let header_len = if with_fixed_cost { 4 } else { 3 };
    if header.len() != header_len {
        return Err(perr(hl, section, format!("header needs {header_len} fields")));
    }
    let as_count = |v: f64, what: &str| -> Result<usize, InstanceError> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(perr(hl, section, format!("{what} must be a non-negative integer")))
        }
    };
    let n = as_count(header[0], "customer count")?;
    let m = as_count(header[1], "fleet size")?;
    let capacity = header[2];
    let fixed = if with_fixed_cost { header[3] } else { 0.0 };
    if rows.len() != n + 2 {
        return Err(perr(
            last,
            section,
            format!("expected depot and {n} customer lines, found {}", rows.len() - 1),
        ));
    }
    let (dl, depot) = &rows[1];
    if depot.len() != 2 {
        return Err(perr(*dl, section, "depot line needs `x y`"));
    }
    let mut coords = vec![[depot[0], depot[1]]];
    let mut demand = vec![0.0];
    let mut profit = vec![0.0];
    for (l, r) in &rows[2..] {
        if r.len() != 4 {
            return Err(perr(*l, section, "customer line needs `x y demand profit`"));
        }
        coords.push([r[0], r[1]]);
        demand.push(r[2]);
        profit.push(r[3]);
    }
    let weight: Vec<f64> = demand
        .iter()
        .enumerate()
        .map(|(i, &q)| if i == 0 { 0.0 } else { default_weight(q) })
        .collect();
    let (edge_weight, dist) = if with_fixed_cost && fixed != 0.0 {
        let nodes = n + 1;
        let mut d = vec![0.0; nodes * nodes];
        for i in 0..nodes {
            for j in 0..nodes {
                if i != j {
                    let mut v = EdgeWeight::Euc2dExact.euclidean(coords[i], coords[j]);
                    if i == 0 || j == 0 {
                        v += fixed / 2.0;
                    }
                    d[i * nodes + j] = v;
                }
            }
        }
        (EdgeWeight::Explicit, Some(d))
    } else {
        (EdgeWeight::Euc2dExact, None)
    };
    Instance::new(InstanceData {
        name: section.to_string(),
        coords,
        dist,
        edge_weight,
        demand,
        profit,
        weight,
        groups: vec![(1..=n).collect()],
        service_level: vec![0.0],
        fleet_size: m,
        capacity,
    })
}
