//! Arithmetic expressions for rotation numbers, e.g. `golden`, `sqrt(2)-1`,
//! `frac(pi)`, `(sqrt(5)-1)/2`.
//!
//! Grammar: `+ - * / ^`, parentheses, decimal literals, the constants
//! `golden` (`(√5−1)/2`), `phi` (`(1+√5)/2`), `pi`, `e`, and the functions
//! `sqrt`, `frac` (fractional part).

use circle_core::diophantine::golden_mean;

use crate::error::LabError;

pub fn eval_alpha(src: &str) -> Result<f64, LabError> {
    let mut p = Parser { s: src.as_bytes(), i: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    if !v.is_finite() {
        return Err(LabError::Expr(format!("`{src}` is not finite")));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> LabError {
        LabError::Expr(format!("{what} at offset {}", self.i))
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64, LabError> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v += self.term()?;
            } else if self.eat(b'-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, LabError> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, LabError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, LabError> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end")),
        }
    }

    fn number(&mut self) -> Result<f64, LabError> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
            self.i += 1;
        }
        if self.i < self.s.len() && (self.s[self.i] == b'e' || self.s[self.i] == b'E') {
            let save = self.i;
            self.i += 1;
            if self.i < self.s.len() && (self.s[self.i] == b'+' || self.s[self.i] == b'-') {
                self.i += 1;
            }
            let digits = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            if self.i == digits {
                self.i = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
        text.parse::<f64>().map_err(|_| LabError::Expr(format!("bad number `{text}`")))
    }

    fn ident(&mut self) -> Result<f64, LabError> {
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
            self.i += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.i]).expect("ascii").to_ascii_lowercase();
        if self.peek() == Some(b'(') {
            let arg = self.atom()?;
            return match name.as_str() {
                "sqrt" => Ok(arg.sqrt()),
                "frac" => Ok(arg - arg.floor()),
                _ => Err(LabError::Expr(format!("unknown function `{name}`"))),
            };
        }
        match name.as_str() {
            "golden" => Ok(golden_mean()),
            "phi" => Ok(0.5 * (1.0 + 5f64.sqrt())),
            "pi" => Ok(std::f64::consts::PI),
            "e" => Ok(std::f64::consts::E),
            _ => Err(LabError::Expr(format!("unknown constant `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_functions() {
        assert_eq!(eval_alpha("golden").unwrap(), golden_mean());
        assert!((eval_alpha("(sqrt(5) - 1)/2").unwrap() - golden_mean()).abs() < 1e-16);
        assert!((eval_alpha("phi - 1").unwrap() - golden_mean()).abs() < 1e-15);
        assert!((eval_alpha("frac(pi)").unwrap() - (std::f64::consts::PI - 3.0)).abs() < 1e-16);
        assert_eq!(eval_alpha("2^-1").unwrap(), 0.5);
        assert_eq!(eval_alpha("-1.5e-1 + 1").unwrap(), 0.85);
        assert_eq!(eval_alpha("0.25").unwrap(), 0.25);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "sqrt(", "2 +", "foo", "1 2", "cos(1)", "1/0"] {
            assert!(eval_alpha(s).is_err(), "{s}");
        }
    }
}
