//! Parsing of quantity strings such as `"4e4 N/mm^2"` into SI values.

use std::fmt;

use crate::error::{Error, Result};

/// Exponents of length, mass and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimension {
    pub length: f64,
    pub mass: f64,
    pub time: f64,
}

impl Dimension {
    pub const NONE: Self = Self::new(0.0, 0.0, 0.0);
    pub const LENGTH: Self = Self::new(1.0, 0.0, 0.0);
    pub const AREA: Self = Self::new(2.0, 0.0, 0.0);
    pub const TIME: Self = Self::new(0.0, 0.0, 1.0);
    pub const RATE: Self = Self::new(0.0, 0.0, -1.0);
    pub const PRESSURE: Self = Self::new(-1.0, 1.0, -2.0);
    pub const TOUGHNESS: Self = Self::new(-0.5, 1.0, -2.0);
    pub const VISCOSITY: Self = Self::new(-1.0, 1.0, -1.0);
    pub const DENSITY: Self = Self::new(-3.0, 1.0, 0.0);
    /// Pa·s/m, the crack-front regularisation constant.
    pub const DRAG: Self = Self::new(-2.0, 1.0, -1.0);
    /// kg/(m²·s), the injected mass flux.
    pub const MASS_FLUX: Self = Self::new(-2.0, 1.0, -1.0);

    pub const fn new(length: f64, mass: f64, time: f64) -> Self {
        Self { length, mass, time }
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.length + o.length, self.mass + o.mass, self.time + o.time)
    }

    fn powf(self, e: f64) -> Self {
        Self::new(self.length * e, self.mass * e, self.time * e)
    }

    fn approx_eq(self, o: Self) -> bool {
        (self.length - o.length).abs() < 1e-12
            && (self.mass - o.mass).abs() < 1e-12
            && (self.time - o.time).abs() < 1e-12
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m^{} kg^{} s^{}", self.length, self.mass, self.time)
    }
}

/// SI scale factor together with the dimension of a unit expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit {
    pub scale: f64,
    pub dim: Dimension,
}

impl Unit {
    const fn new(scale: f64, l: f64, m: f64, t: f64) -> Self {
        Self {
            scale,
            dim: Dimension::new(l, m, t),
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            scale: self.scale * o.scale,
            dim: self.dim.mul(o.dim),
        }
    }

    fn powf(self, e: f64) -> Self {
        Self {
            scale: self.scale.powf(e),
            dim: self.dim.powf(e),
        }
    }
}

fn lookup(name: &str) -> Option<Unit> {
    let u = match name {
        "m" => Unit::new(1.0, 1.0, 0.0, 0.0),
        "km" => Unit::new(1e3, 1.0, 0.0, 0.0),
        "cm" => Unit::new(1e-2, 1.0, 0.0, 0.0),
        "mm" => Unit::new(1e-3, 1.0, 0.0, 0.0),
        "um" | "µm" => Unit::new(1e-6, 1.0, 0.0, 0.0),
        "kg" => Unit::new(1.0, 0.0, 1.0, 0.0),
        "g" => Unit::new(1e-3, 0.0, 1.0, 0.0),
        "t" => Unit::new(1e3, 0.0, 1.0, 0.0),
        "s" => Unit::new(1.0, 0.0, 0.0, 1.0),
        "ms" => Unit::new(1e-3, 0.0, 0.0, 1.0),
        "us" | "µs" => Unit::new(1e-6, 0.0, 0.0, 1.0),
        "min" => Unit::new(60.0, 0.0, 0.0, 1.0),
        "h" => Unit::new(3600.0, 0.0, 0.0, 1.0),
        "N" => Unit::new(1.0, 1.0, 1.0, -2.0),
        "kN" => Unit::new(1e3, 1.0, 1.0, -2.0),
        "MN" => Unit::new(1e6, 1.0, 1.0, -2.0),
        "Pa" => Unit::new(1.0, -1.0, 1.0, -2.0),
        "kPa" => Unit::new(1e3, -1.0, 1.0, -2.0),
        "MPa" => Unit::new(1e6, -1.0, 1.0, -2.0),
        "GPa" => Unit::new(1e9, -1.0, 1.0, -2.0),
        _ => return None,
    };
    Some(u)
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Unit {
            input: self.src.to_string(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // expr := power (('*' | '/') power)*
    fn expr(&mut self) -> Result<Unit> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') || self.eat('·') {
                acc = acc.mul(self.power()?);
            } else if self.eat('/') {
                acc = acc.mul(self.power()?.powf(-1.0));
            } else {
                return Ok(acc);
            }
        }
    }

    // power := atom ('^' exponent)?
    fn power(&mut self) -> Result<Unit> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            Ok(base.powf(e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Unit> {
        if self.eat('(') {
            let inner = self.expr()?;
            if !self.eat(')') {
                return self.fail("missing `)`");
            }
            return Ok(inner);
        }
        if self.eat('1') {
            return Ok(Unit::new(1.0, 0.0, 0.0, 0.0));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphabetic() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.fail(format!("expected a unit name at position {}", start + 1));
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match lookup(&name) {
            Some(u) => Ok(u),
            None => self.fail(format!("unknown unit `{name}`")),
        }
    }

    // exponent := number | '(' number ('/' number)? ')'
    fn exponent(&mut self) -> Result<f64> {
        if self.eat('(') {
            let num = self.number()?;
            let value = if self.eat('/') { num / self.number()? } else { num };
            if !self.eat(')') {
                return self.fail("missing `)` after exponent");
            }
            return Ok(value);
        }
        self.number()
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.fail(format!("bad exponent `{text}`")),
        }
    }
}

/// Parses a unit expression like `N*s/m^3` or `MPa*m^0.5`.
pub fn parse_unit(expr: &str) -> Result<Unit> {
    let mut p = Parser::new(expr);
    if p.chars.is_empty() {
        return Ok(Unit::new(1.0, 0.0, 0.0, 0.0));
    }
    let unit = p.expr()?;
    if p.pos != p.chars.len() {
        return p.fail(format!("unexpected trailing input at position {}", p.pos + 1));
    }
    Ok(unit)
}

/// Parses `"<number> <unit>"` and converts to SI, checking the dimension.
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64> {
    let text = text.trim();
    let split = text.find(char::is_whitespace).unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num.parse().map_err(|_| Error::Unit {
        input: text.to_string(),
        message: format!("`{num}` is not a number"),
    })?;
    let unit = parse_unit(unit)?;
    if !unit.dim.approx_eq(expected) {
        return Err(Error::Unit {
            input: text.to_string(),
            message: format!("dimension {} does not match expected {}", unit.dim, expected),
        });
    }
    Ok(value * unit.scale)
}
