//! Error budgets over a service mesh: the plain per-service budget and the
//! soft budget that charges each service for the risk its product peers
//! carry.
//!
//! All budget math is generic over [`Fraction`], so it runs on `f64` for
//! mesh reports and on `BigRational` where exact decimal arithmetic matters.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::TimeWindow;

/// A dimensionless fraction-like scalar: `f64` or an exact rational.
pub trait Fraction: Num + Signed + PartialOrd + FromPrimitive + Clone {}

impl<T> Fraction for T where T: Num + Signed + PartialOrd + FromPrimitive + Clone {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SloKind {
    Availability,
    Latency,
    ErrorRate,
    Other,
}

/// Target of an SLO: a single fraction the SLI must meet, or a bounded range
/// it must stay inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SloTarget<S> {
    Fraction { target: S },
    Range { lower: S, upper: S },
}

/// A service-level objective over an explicit window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloRecord<S> {
    /// Service or product the objective applies to.
    pub subject_id: String,
    pub kind: SloKind,
    #[serde(flatten)]
    pub target: SloTarget<S>,
    pub window: TimeWindow,
}

impl<S: Fraction> SloRecord<S> {
    pub fn validate(&self) -> Result<()> {
        match &self.target {
            SloTarget::Fraction { target } => {
                check_fraction(target, "slo target")?;
            }
            SloTarget::Range { lower, upper } => {
                if lower > upper {
                    return Err(Error::out_of_range(format!(
                        "slo range for {:?} has lower > upper",
                        self.subject_id
                    )));
                }
            }
        }
        self.window.validate()
    }

    /// The scalar target, when this objective has one. Range objectives have
    /// no single error budget.
    pub fn fraction_target(&self) -> Result<&S> {
        match &self.target {
            SloTarget::Fraction { target } => Ok(target),
            SloTarget::Range { .. } => Err(Error::invalid_argument(format!(
                "slo for {:?} is a range; an error budget needs a single fraction target",
                self.subject_id
            ))),
        }
    }
}

/// Per-service observations for one mesh window. `unavailability` is the
/// service's own downtime fraction, measured excluding dependency downtime;
/// `latest_ads` is the deployment score of the version live at window end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceWindowStats<S> {
    pub service_id: String,
    pub window: TimeWindow,
    pub unavailability: S,
    pub latest_ads: S,
    pub total_items: usize,
}

impl<S: Fraction> ServiceWindowStats<S> {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        check_fraction(&self.unavailability, "unavailability")?;
        if self.total_items == 0 {
            return Err(Error::out_of_range(format!(
                "service {:?} has zero checklist items",
                self.service_id
            )));
        }
        let total = S::from_usize(self.total_items).expect("item count fits the scalar type");
        if !(self.latest_ads > S::zero() && self.latest_ads < total) {
            return Err(Error::out_of_range(format!(
                "service {:?} needs 0 < ads < {}, deployment scores are strictly inside the item count",
                self.service_id, self.total_items
            )));
        }
        Ok(())
    }

    /// True risk factor 1 - ads / total_items, strictly inside (0, 1).
    pub fn risk_factor(&self) -> S {
        let total = S::from_usize(self.total_items).expect("item count fits the scalar type");
        S::one() - self.latest_ads.clone() / total
    }
}

/// A customer-facing product: its SLO and the services it depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product<S> {
    pub product_id: String,
    pub slo: SloRecord<S>,
    pub services: Vec<String>,
}

/// Snapshot of products and per-service stats over one shared window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshWindow<S> {
    pub window: TimeWindow,
    pub products: Vec<Product<S>>,
    pub services: Vec<ServiceWindowStats<S>>,
}

impl<S: Fraction> MeshWindow<S> {
    /// Checks identifiers, ranges, and that every product member resolves to
    /// stats sharing the mesh window.
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        for (i, stats) in self.services.iter().enumerate() {
            if self.services[..i]
                .iter()
                .any(|other| other.service_id == stats.service_id)
            {
                return Err(Error::DuplicateId(stats.service_id.clone()));
            }
            stats.validate()?;
            if stats.window != self.window {
                return Err(Error::invalid_argument(format!(
                    "service {:?} reports a different window than the mesh; partial windows are rejected",
                    stats.service_id
                )));
            }
        }
        for (i, product) in self.products.iter().enumerate() {
            if self.products[..i]
                .iter()
                .any(|other| other.product_id == product.product_id)
            {
                return Err(Error::DuplicateId(product.product_id.clone()));
            }
            product.slo.validate()?;
            if product.services.is_empty() {
                return Err(Error::invalid_argument(format!(
                    "product {:?} has no member services",
                    product.product_id
                )));
            }
            for (j, member) in product.services.iter().enumerate() {
                if product.services[..j].contains(member) {
                    return Err(Error::DuplicateId(member.clone()));
                }
                if self.stats_for(member).is_none() {
                    return Err(Error::IncompleteMesh {
                        service_id: member.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn stats_for(&self, service_id: &str) -> Option<&ServiceWindowStats<S>> {
        self.services
            .iter()
            .find(|stats| stats.service_id == service_id)
    }

    pub fn product(&self, product_id: &str) -> Option<&Product<S>> {
        self.products
            .iter()
            .find(|product| product.product_id == product_id)
    }

    /// Products containing `service_id`, in input order.
    pub fn products_of(&self, service_id: &str) -> Vec<&Product<S>> {
        self.products
            .iter()
            .filter(|product| product.services.iter().any(|m| m == service_id))
            .collect()
    }
}

/// One peer's charge against a service's budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerm<S> {
    pub service_id: String,
    /// 1 - ads / total_items for the peer, strictly inside (0, 1).
    pub risk_factor: S,
    pub unavailability: S,
    /// risk_factor * unavailability.
    pub contribution: S,
}

/// Soft-budget computation result for one (service, product) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetResult<S> {
    pub service_id: String,
    pub product_id: String,
    /// 1 - SLO for the product the service serves.
    pub plain_budget: S,
    /// plain budget minus the peer penalties; may be negative.
    pub soft_budget: S,
    /// The raw value clamped at zero for release-gating use.
    pub soft_budget_clamped: S,
    pub penalty_terms: Vec<PenaltyTerm<S>>,
}

/// Error budget of a single objective: 1 - SLO.
pub fn error_budget<S: Fraction>(slo: S) -> Result<S> {
    check_fraction(&slo, "slo")?;
    Ok(S::one() - slo)
}

/// Soft error budget of `service_id` within `product_id`: the service's own
/// budget reduced by every *other* member's risk-weighted unavailability.
/// Both the raw value (which may be negative) and a zero-clamped value are
/// reported, with the full penalty decomposition.
pub fn soft_error_budget<S: Fraction>(
    service_id: &str,
    product_id: &str,
    mesh: &MeshWindow<S>,
) -> Result<BudgetResult<S>> {
    mesh.validate()?;
    let product = mesh
        .product(product_id)
        .ok_or_else(|| Error::UnknownProduct(product_id.to_string()))?;
    if !product.services.iter().any(|m| m == service_id) {
        return Err(Error::UnknownService(format!(
            "{service_id} is not a member of product {product_id}"
        )));
    }

    let plain_budget = error_budget(product.slo.fraction_target()?.clone())?;

    let mut penalty_terms = Vec::new();
    let mut penalty_total = S::zero();
    for member in &product.services {
        if member == service_id {
            continue;
        }
        let stats = mesh
            .stats_for(member)
            .ok_or_else(|| Error::IncompleteMesh {
                service_id: member.clone(),
            })?;
        let risk_factor = stats.risk_factor();
        let contribution = risk_factor.clone() * stats.unavailability.clone();
        penalty_total = penalty_total + contribution.clone();
        penalty_terms.push(PenaltyTerm {
            service_id: member.clone(),
            risk_factor,
            unavailability: stats.unavailability.clone(),
            contribution,
        });
    }

    let soft_budget = plain_budget.clone() - penalty_total;
    let soft_budget_clamped = if soft_budget < S::zero() {
        S::zero()
    } else {
        soft_budget.clone()
    };

    Ok(BudgetResult {
        service_id: service_id.to_string(),
        product_id: product_id.to_string(),
        plain_budget,
        soft_budget,
        soft_budget_clamped,
        penalty_terms,
    })
}

/// The recommended budget for a service in several products: the minimum
/// raw soft budget, ties broken by the lexicographically smallest product id.
pub fn min_soft_budget<S: Fraction>(
    service_id: &str,
    mesh: &MeshWindow<S>,
) -> Result<BudgetResult<S>> {
    mesh.validate()?;
    let mut products = mesh.products_of(service_id);
    if products.is_empty() {
        return Err(Error::UnknownService(format!(
            "{service_id} is not a member of any product"
        )));
    }
    products.sort_by(|x, y| x.product_id.cmp(&y.product_id));

    let mut best: Option<BudgetResult<S>> = None;
    for product in products {
        let result = soft_error_budget(service_id, &product.product_id, mesh)?;
        best = match best {
            None => Some(result),
            Some(current) => {
                if result.soft_budget < current.soft_budget {
                    Some(result)
                } else {
                    Some(current)
                }
            }
        };
    }
    Ok(best.expect("at least one product was present"))
}

fn check_fraction<S: Fraction>(value: &S, what: &str) -> Result<()> {
    if !(*value >= S::zero() && *value <= S::one()) {
        return Err(Error::out_of_range(format!("{what} must lie in [0, 1]")));
    }
    Ok(())
}

/// Parses a plain decimal string ("0.9999") into an exact rational.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let trimmed = text.trim();
    let (sign, digits) = match trimmed.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, trimmed.strip_prefix('+').unwrap_or(trimmed)),
    };
    let (integer, fraction) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if integer.is_empty() && fraction.is_empty() {
        return Err(Error::invalid_argument(format!(
            "{text:?} is not a decimal number"
        )));
    }
    if !integer.chars().all(|c| c.is_ascii_digit()) || !fraction.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::invalid_argument(format!(
            "{text:?} is not a decimal number"
        )));
    }
    let mantissa: BigInt = format!(
        "{}{}",
        if integer.is_empty() { "0" } else { integer },
        fraction
    )
    .parse()
    .map_err(|_| Error::invalid_argument(format!("{text:?} is not a decimal number")))?;
    let denominator = BigInt::from(10u8).pow(fraction.len() as u32);
    Ok(BigRational::new(BigInt::from(sign) * mantissa, denominator))
}

/// Exact decimal rendering of one SLO's error budget over a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactBudgetBreakdown {
    pub slo: String,
    pub error_budget: String,
    pub error_budget_percent: String,
    pub window_days: u32,
    pub allowed_downtime_minutes: String,
}

/// Computes 1 - SLO and its downtime allowance in exact decimal arithmetic,
/// so "0.9999 over 30 days" comes out as exactly 4.32 minutes.
pub fn exact_budget_breakdown(slo_text: &str, window_days: u32) -> Result<ExactBudgetBreakdown> {
    if window_days == 0 {
        return Err(Error::invalid_argument(
            "window must cover at least one day",
        ));
    }
    let slo = parse_decimal(slo_text)?;
    let budget = error_budget(slo.clone())?;
    let hundred = BigRational::from_integer(BigInt::from(100u8));
    let minutes_per_window =
        BigRational::from_integer(BigInt::from(u64::from(window_days) * 24 * 60));
    Ok(ExactBudgetBreakdown {
        slo: format_decimal(&slo)?,
        error_budget: format_decimal(&budget)?,
        error_budget_percent: format_decimal(&(budget.clone() * hundred))?,
        window_days,
        allowed_downtime_minutes: format_decimal(&(budget * minutes_per_window))?,
    })
}

/// Renders a rational as an exact decimal string. Fails when the reduced
/// denominator has prime factors other than 2 and 5.
pub fn format_decimal(value: &BigRational) -> Result<String> {
    let mut denom = value.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if denom != BigInt::from(1u8) {
        return Err(Error::numerical(format!(
            "{value} has no exact decimal representation"
        )));
    }
    let places = twos.max(fives);
    let scale = two.pow(places - twos) * five.pow(places - fives);
    let scaled = value.numer() * scale;
    let negative = scaled < BigInt::from(0u8);
    let digits = scaled.magnitude().to_string();
    let body = if places == 0 {
        digits
    } else {
        let places = places as usize;
        let padded = if digits.len() <= places {
            format!("{}{}", "0".repeat(places - digits.len() + 1), digits)
        } else {
            digits
        };
        let split = padded.len() - places;
        format!("{}.{}", &padded[..split], &padded[split..])
    };
    Ok(if negative { format!("-{body}") } else { body })
}
