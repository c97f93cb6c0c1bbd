//! Node values and domains.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rust_decimal::Decimal;

use crate::error::{Result, SbnError};

/// A single value a node can take.
///
/// Payoff vectors hold one fixed-point decimal per player. Decimals are kept
/// normalized (no trailing zeros) so that equal payoffs compare and hash equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Symbol(String),
    Payoff(Vec<Decimal>),
}

impl Value {
    pub fn symbol(s: impl Into<String>) -> Self {
        Value::Symbol(s.into())
    }

    pub fn payoff(entries: impl IntoIterator<Item = Decimal>) -> Self {
        Value::Payoff(entries.into_iter().map(|d| d.normalize()).collect())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Value::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_payoff(&self) -> Option<&[Decimal]> {
        match self {
            Value::Payoff(v) => Some(v),
            _ => None,
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Symbol(s.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Symbol(s) => write!(f, "{s:?}"),
            Value::Payoff(v) => {
                write!(f, "(")?;
                for (i, d) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{d}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug)]
struct DomainInner {
    values: Vec<Value>,
    index: HashMap<Value, usize>,
}

/// Ordered, duplicate-free, non-empty set of values. The order indexes CPD
/// columns. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct Domain(Arc<DomainInner>);

impl Domain {
    pub fn new(values: Vec<Value>) -> Result<Self> {
        if values.is_empty() {
            return Err(SbnError::structural("domain is empty"));
        }
        let mut index = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(SbnError::structural(format!("duplicate domain value {v}")));
            }
        }
        Ok(Domain(Arc::new(DomainInner { values, index })))
    }

    /// Integers `lo..=hi`.
    pub fn int_range(lo: i64, hi: i64) -> Result<Self> {
        Domain::new((lo..=hi).map(Value::Int).collect())
    }

    pub fn len(&self) -> usize {
        self.0.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.values.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0.values
    }

    pub fn get(&self, i: usize) -> Option<&Value> {
        self.0.values.get(i)
    }

    pub fn position(&self, v: &Value) -> Option<usize> {
        self.0.index.get(v).copied()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.values == other.0.values
    }
}
