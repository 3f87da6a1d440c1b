//! Shared tokenizer for the `name(opt,key=value,...)` spec grammar used by
//! distributions and T-conorms.

use crate::error::{Error, Result};

pub(crate) struct SpecText<'a> {
    pub name: &'a str,
    pub options: Vec<SpecOption<'a>>,
}

pub(crate) enum SpecOption<'a> {
    Flag(&'a str),
    Value(&'a str, f64),
}

pub(crate) fn tokenize<'a>(what: &'static str, input: &'a str) -> Result<SpecText<'a>> {
    let s = input.trim();
    let (name, rest) = match s.find('(') {
        Some(i) => {
            if !s.ends_with(')') {
                return Err(Error::parse(what, input, "missing closing parenthesis"));
            }
            (&s[..i], Some(&s[i + 1..s.len() - 1]))
        }
        None => (s, None),
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::parse(what, input, "empty name"));
    }
    let mut options = Vec::new();
    if let Some(rest) = rest {
        for item in rest.split(',') {
            let item = item.trim();
            if item.is_empty() {
                return Err(Error::parse(what, input, "empty option"));
            }
            match item.split_once('=') {
                Some((k, v)) => {
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(what, input, format!("bad number `{v}`")))?;
                    if !v.is_finite() {
                        return Err(Error::parse(what, input, "non-finite parameter"));
                    }
                    options.push(SpecOption::Value(k.trim(), v));
                }
                None => options.push(SpecOption::Flag(item)),
            }
        }
    }
    Ok(SpecText { name, options })
}
