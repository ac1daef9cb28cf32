use deltametric::amalgam::{cap_distances, extend_order, free_amalgam, OrderConstraint};
use deltametric::coding::{
    approx_check, check_theory_t, encode_dvs, model_encode, sim_check, triangle_structure, ts_isomorphic,
    validate_code, ClauseStatus, TheoryWitness,
};
use deltametric::dvs::{delta_triangle, gen_delta_alpha, Cap, Closure};
use deltametric::equiv::{
    gl2_apply, gl2_equivalent, linearity_check, scaling_witness, triangle_bijection_check, FragmentVerdict,
    Gl2Verdict, RatMatrix,
};
use deltametric::limitbuilder::{
    density_perturb, extend_partial_isometry, extend_partial_isometry_back, extension_property_check_within,
    saturate, Extension, Limits,
};
use deltametric::ramsey::{arrow, automorphism_count, ArrowStatus};
use deltametric::space::{PartialIsometry, Validation};
use deltametric::wire::{CodeJson, ModelJson, SetJson, SpaceJson, WitnessJson};
use deltametric::{BigRational, Error, ExactReal, Result, Scalar, Space};
use serde_json::{json, Value};

use crate::io::{self, label, label_pairs, number, numbers};
use crate::{Budget, Exit, Output, Verb};

fn text(x: &ExactReal) -> Value {
    Value::String(x.to_text())
}

fn texts(xs: &[ExactReal]) -> Value {
    xs.iter().map(text).collect()
}

fn space_json(x: &Space) -> Value {
    serde_json::to_value(SpaceJson::from_space(x)).expect("serializable")
}

fn limits(b: Budget) -> Limits {
    Limits {
        max_points: b.max_points,
        max_pairs: b.max_pairs,
    }
}

fn isometry(space: &Space, map: &str) -> Result<PartialIsometry> {
    let pairs = label_pairs(map)?
        .iter()
        .map(|(a, b)| Ok((label(space, a)?, label(space, b)?)))
        .collect::<Result<Vec<_>>>()?;
    PartialIsometry::new(pairs)
}

fn isometry_json(space: &Space, p: &PartialIsometry) -> Value {
    p.pairs()
        .iter()
        .map(|&(a, b)| json!([space.label(a), space.label(b)]))
        .collect()
}

fn extension_json(space: &Space, e: &Extension<ExactReal>) -> Value {
    json!({
        "base": e.base.iter().map(|&i| space.label(i)).collect::<Vec<_>>(),
        "profile": texts(&e.profile),
        "slot": e.slot,
    })
}

fn clause_json<W>(c: &ClauseStatus<W>, w: impl Fn(&W) -> Value) -> Value {
    match c {
        ClauseStatus::Satisfied => json!({"status": "Satisfied"}),
        ClauseStatus::Violated(x) => json!({"status": "Violated", "witness": w(x)}),
        ClauseStatus::NotFalsifiable(p) => {
            json!({"status": "NotFalsifiable", "pending": p.as_ref().map(w)})
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

pub fn run(verb: Verb) -> Result<Output> {
    match verb {
        Verb::GenDvs { alpha, height, bound } => {
            let d = gen_delta_alpha(&number(&alpha)?, height, &number(&bound)?)?;
            Ok(Output::yes(serde_json::to_value(SetJson::from_set(&d)).expect("serializable")))
        }

        Verb::Close {
            delta,
            bound,
            limit,
            check,
        } => {
            let d = io::read_set(&delta)?;
            if check {
                let first = match d.validate_closure() {
                    Closure::Closed => Value::Null,
                    Closure::FirstViolation(x, y) => json!([x.to_text(), y.to_text()]),
                };
                let count = d.closure_violations().len();
                return Ok(Output::verdict(
                    count == 0,
                    json!({
                        "closed": count == 0,
                        "first_violation": first,
                        "violations": count,
                        "cap_attained": cap_attained(&d),
                    }),
                ));
            }
            let bound = match bound {
                Some(b) => number(&b)?,
                None => match d.cap() {
                    Cap::Bounded(c) => c.clone(),
                    Cap::Unbounded => d.max().cloned().ok_or_else(|| bad("empty set needs --bound"))?,
                },
            };
            let closed = d.close(&bound, limit)?;
            eprintln!("closure added {} values", closed.len() - d.len());
            Ok(Output::yes(serde_json::to_value(SetJson::from_set(&closed)).expect("serializable")))
        }

        Verb::CheckTriangle { delta, triple } => {
            let d = io::read_set(&delta)?;
            let t = numbers(&triple)?;
            let [x, y, z] = t.as_slice() else {
                return Err(bad("--triple takes three numbers"));
            };
            let ok = delta_triangle(x, y, z, &d);
            Ok(Output::verdict(ok, json!({"triangle": ok})))
        }

        Verb::CheckEquiv { d1, d2, map } => {
            let (a, b) = (io::read_set(&d1)?, io::read_set(&d2)?);
            if let Some(path) = map {
                let f = io::read_value_map(&path)?;
                return Ok(match triangle_bijection_check(&a, &b, &f)? {
                    FragmentVerdict::FragmentConsistent => {
                        Output::yes(json!({"status": "FragmentConsistent", "linear": linearity_check(&f, &a)}))
                    }
                    FragmentVerdict::Broken(x, y, z) => Output::new(
                        Exit::No,
                        json!({"status": "Broken", "triple": [x.to_text(), y.to_text(), z.to_text()]}),
                    ),
                });
            }
            Ok(match scaling_witness(&a, &b) {
                Ok(Some(w)) => Output::yes(json!({
                    "status": "Scaling",
                    "witness": WitnessJson::from_scaling(&w),
                    "linear": linearity_check(&w.map(), &a),
                })),
                Ok(None) => Output::new(Exit::No, json!({"status": "NoScaling"})),
                Err(e @ Error::MixedRadicands(..)) => {
                    Output::new(Exit::Unknown, json!({"status": "Unknown", "reason": e.to_string()}))
                }
                Err(e) => return Err(e),
            })
        }

        Verb::Gl2 {
            alpha,
            beta,
            matrix,
            search_height,
        } => {
            let alpha = number(&alpha)?;
            if let Some(m) = matrix {
                let e = m
                    .split(',')
                    .map(|s| BigRational::parse_text(s.trim()).or_else(|_| match number(s)? {
                        ExactReal::Rational(q) => Ok(q),
                        _ => Err(bad("matrix entries must be rational")),
                    }))
                    .collect::<Result<Vec<_>>>()?;
                let [a, b, c, d] = <[BigRational; 4]>::try_from(e).map_err(|_| bad("--matrix takes four entries"))?;
                let m = RatMatrix::new(a, b, c, d)?;
                return Ok(Output::yes(json!({"value": gl2_apply(&m, &alpha)?.to_text()})));
            }
            let beta = number(&beta.ok_or_else(|| bad("gl2 needs --beta or --matrix"))?)?;
            if alpha.is_rational() || beta.is_rational() {
                return Err(bad("alpha and beta must be irrational surds"));
            }
            Ok(match gl2_equivalent(&alpha, &beta, search_height) {
                Gl2Verdict::Equivalent(m) => Output::yes(json!({
                    "status": "Equivalent",
                    "witness": WitnessJson::from_matrix(&m),
                })),
                Gl2Verdict::Inequivalent => Output::new(Exit::No, json!({"status": "Inequivalent"})),
                Gl2Verdict::Unknown => Output::new(Exit::Unknown, json!({"status": "Unknown"})),
            })
        }

        Verb::Amalgamate { b, c, overlap, cap } => {
            let (sb, sc) = (io::read_space(&b)?, io::read_space(&c)?);
            let pairs = label_pairs(&overlap)?
                .iter()
                .map(|(x, y)| Ok((label(&sb, x)?, label(&sc, y)?)))
                .collect::<Result<Vec<_>>>()?;
            let am = free_amalgam(&sb, &sc, &pairs)?;
            let mut space = am.space.clone();
            if let Some(cap) = cap {
                space = cap_distances(&space, &number(&cap)?)?;
            }
            if let Some(base) = sb.order() {
                let mut cons = Vec::new();
                for i in 0..sc.len() {
                    for j in 0..sc.len() {
                        let (pi, pj) = (am.from_c[i], am.from_c[j]);
                        if pi >= sb.len() && sc.is_ordered() && sc.less(i, j) {
                            cons.push(OrderConstraint::before(pi, pj));
                        }
                        if pj >= sb.len() && pi < sb.len() && sc.is_ordered() && sc.less(i, j) {
                            cons.push(OrderConstraint::after(pj, pi));
                        }
                    }
                }
                let order = extend_order(&space, base, &cons)?;
                space = space.with_order(order)?;
            }
            if let Some(d) = sb.delta() {
                space = space.with_delta(d.clone());
            }
            let valid = space.validate();
            let labels = |v: &[usize]| v.iter().map(|&i| space.label(i).to_string()).collect::<Vec<_>>();
            Ok(Output::verdict(
                valid.is_ok(),
                json!({
                    "space": space_json(&space),
                    "from_b": labels(&am.from_b),
                    "from_c": labels(&am.from_c),
                    "valid": valid.is_ok(),
                    "violation": match valid { Validation::Ok => Value::Null, Validation::Violation(v) => json!(format!("{v:?}")) },
                }),
            ))
        }

        Verb::Saturate {
            space,
            delta,
            k,
            budget,
        } => {
            let (m, d) = (io::read_space(&space)?, io::read_set(&delta)?);
            let lim = limits(budget);
            let sat = saturate(&m, &d, k, &lim)?;
            let left = sat.report.unrealized.len();
            Ok(Output::new(
                if left == 0 { Exit::Yes } else { Exit::Unknown },
                json!({
                    "space": space_json(&sat.space),
                    "added": sat.added,
                    "unrealized": left,
                    "budget": {
                        "max_points": lim.max_points,
                        "max_pairs": lim.max_pairs.to_string(),
                        "points_used": sat.space.len(),
                        "pairs_used": sat.report.checked.to_string(),
                    },
                }),
            ))
        }

        Verb::CheckExtension {
            space,
            delta,
            k,
            within,
            budget,
        } => {
            let (m, d) = (io::read_space(&space)?, io::read_set(&delta)?);
            let points = match within {
                Some(w) => w.split(',').map(|l| label(&m, l)).collect::<Result<Vec<_>>>()?,
                None => (0..m.len()).collect(),
            };
            let lim = limits(budget);
            let rep = extension_property_check_within(&m, &d, k, &points, &lim)?;
            Ok(Output::verdict(
                rep.is_complete(),
                json!({
                    "complete": rep.is_complete(),
                    "unrealized": rep.unrealized.iter().map(|e| extension_json(&m, e)).collect::<Vec<_>>(),
                    "budget": {"max_pairs": lim.max_pairs.to_string(), "pairs_used": rep.checked.to_string()},
                }),
            ))
        }

        Verb::Perturb {
            space,
            delta,
            map,
            eps,
        } => {
            let (m, d) = (io::read_space(&space)?, io::read_set(&delta)?);
            let p = isometry(&m, &map)?;
            let out = density_perturb(&m, &p, &number(&eps)?, &d)?;
            let images: Vec<Value> = p
                .domain()
                .iter()
                .zip(&out.images)
                .map(|(&x, &y)| json!([m.label(x), out.space.label(y)]))
                .collect();
            Ok(Output::yes(json!({
                "space": space_json(&out.space),
                "delta": out.delta.to_text(),
                "images": images,
                "gadget": space_json(&out.gadget),
            })))
        }

        Verb::ExtendIsometry {
            space,
            map,
            point,
            back,
        } => {
            let m = io::read_space(&space)?;
            let p = isometry(&m, &map)?;
            let x = label(&m, &point)?;
            let (m2, q) = if back {
                extend_partial_isometry_back(&m, &p, x)?
            } else {
                extend_partial_isometry(&m, &p, x)?
            };
            Ok(Output::yes(json!({
                "space": space_json(&m2),
                "map": isometry_json(&m2, &q),
                "added": m2.len() - m.len(),
            })))
        }

        Verb::CheckArrow {
            c,
            b,
            a,
            k,
            budget,
            jobs,
        } => {
            let (sc, sb, sa) = (io::read_space(&c)?, io::read_space(&b)?, io::read_space(&a)?);
            let v = arrow(&sc, &sb, &sa, k, budget, jobs)?;
            let exit = match v.status {
                ArrowStatus::Holds => Exit::Yes,
                ArrowStatus::Fails => Exit::No,
                ArrowStatus::Unknown => Exit::Unknown,
            };
            let coloring = v.bad_coloring.as_ref().map(|col| {
                col.iter()
                    .map(|(copy, color)| {
                        json!({"copy": copy.iter().map(|&i| sc.label(i)).collect::<Vec<_>>(), "color": color})
                    })
                    .collect::<Vec<_>>()
            });
            Ok(Output::new(
                exit,
                json!({
                    "status": format!("{:?}", v.status),
                    "bad_coloring": coloring,
                    "stats": {
                        "a_copies": v.stats.a_copies,
                        "b_copies": v.stats.b_copies,
                        "strategy": format!("{:?}", v.stats.strategy),
                        "nodes": v.stats.nodes.to_string(),
                        "budget": budget.to_string(),
                    },
                }),
            ))
        }

        Verb::CheckRigid { space } => {
            let m = io::read_space(&space)?;
            let n = automorphism_count(&m);
            Ok(Output::verdict(n <= 1, json!({"rigid": n <= 1, "automorphisms": n})))
        }

        Verb::EncodeCode { delta } => {
            let d = io::read_set(&delta)?;
            Ok(Output::yes(serde_json::to_value(CodeJson::from_code(&encode_dvs(&d))).expect("serializable")))
        }

        Verb::CheckCode { code } => {
            let c = io::read_code(&code)?;
            let r = validate_code(&c);
            let idx = |w: &Vec<usize>| json!(w);
            let [a, b, cc, d] = &r.clauses;
            Ok(Output::verdict(
                r.is_valid(),
                json!({
                    "valid": r.is_valid(),
                    "semantics": "prefix",
                    "clauses": {
                        "a": clause_json(a, idx),
                        "b": clause_json(b, idx),
                        "c": clause_json(cc, idx),
                        "d": clause_json(d, idx),
                    },
                }),
            ))
        }

        Verb::CheckSim { c, d } => {
            let (cc, dd) = (io::read_code(&c)?, io::read_code(&d)?);
            if cc.len() != dd.len() {
                return Err(Error::LengthMismatch(cc.len(), dd.len()));
            }
            Ok(match sim_check(&cc, &dd) {
                Some(w) => Output::yes(json!({
                    "status": "Similar",
                    "perm": w.perm,
                    "witness": {"r": w.ratio.to_text()},
                    "semantics": "prefix",
                })),
                None => Output::new(Exit::No, json!({"status": "NotSimilar", "semantics": "prefix"})),
            })
        }

        Verb::CheckApprox { c, d, budget, jobs } => {
            let (cc, dd) = (io::read_code(&c)?, io::read_code(&d)?);
            if cc.len() != dd.len() {
                return Err(Error::LengthMismatch(cc.len(), dd.len()));
            }
            Ok(match approx_check(&cc, &dd, budget, jobs)? {
                Some(p) => Output::yes(json!({"status": "Approx", "perm": p, "semantics": "prefix"})),
                None => Output::new(Exit::No, json!({"status": "NotApprox", "semantics": "prefix"})),
            })
        }

        Verb::TriangleStructure { delta, other, budget } => {
            let d = io::read_set(&delta)?;
            let s = triangle_structure(&d);
            if let Some(o) = other {
                let e = io::read_set(&o)?;
                let t = triangle_structure(&e);
                return Ok(match ts_isomorphic(&s, &t, budget)? {
                    Some(m) => Output::yes(json!({
                        "isomorphic": true,
                        "map": m.iter().enumerate().map(|(i, &j)| json!([s.universe[i].to_text(), t.universe[j].to_text()])).collect::<Vec<_>>(),
                    })),
                    None => Output::new(Exit::No, json!({"isomorphic": false})),
                });
            }
            let triples: Vec<Value> = s
                .triples()
                .iter()
                .map(|t| json!(t.map(|i| s.universe[i].to_text())))
                .collect();
            Ok(Output::yes(json!({"universe": texts(&s.universe), "triples": triples})))
        }

        Verb::EncodeModel { delta, sample, limit } => {
            let d = io::read_set(&delta)?;
            let sample = sample
                .map(|s| {
                    s.split(',')
                        .map(|q| match number(q)? {
                            ExactReal::Rational(r) => Ok(r),
                            _ => Err(bad("sample entries must be rational")),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let m = model_encode(&d, sample.as_deref(), limit)?;
            Ok(Output::yes(serde_json::to_value(ModelJson::from_model(&m)).expect("serializable")))
        }

        Verb::CheckTheory { model } => {
            let m = io::read_model(&model)?;
            let rep = check_theory_t(&m);
            let w = |w: &TheoryWitness| {
                json!({
                    "q": w.q.iter().map(|q| q.to_text()).collect::<Vec<_>>(),
                    "points": w.points.iter().map(|&i| m.universe[i].to_text()).collect::<Vec<_>>(),
                })
            };
            let clauses: Vec<Value> = rep
                .clauses
                .iter()
                .map(|c| {
                    let mut v = clause_json(&c.status, w);
                    let o = v.as_object_mut().expect("object");
                    o.insert("clause".into(), json!(c.clause));
                    o.insert("checked".into(), json!(c.checked));
                    o.insert("violations".into(), json!(c.violations));
                    o.insert("unwitnessed".into(), json!(c.unwitnessed));
                    v
                })
                .collect();
            let violated = rep.violated();
            Ok(Output::verdict(
                violated.is_empty(),
                json!({"violated": violated, "clauses": clauses, "semantics": "sample"}),
            ))
        }
    }
}

fn cap_attained(d: &deltametric::DistanceSet) -> bool {
    match d.cap() {
        Cap::Bounded(c) => d.contains(c),
        Cap::Unbounded => true,
    }
}
