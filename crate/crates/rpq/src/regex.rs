//! Regular expressions over a declared alphabet.
//!
//! Grammar, loosest binding first: alternation `|`, concatenation by
//! juxtaposition, postfix `*` `+` `?`. `()` is the empty word. Whitespace is
//! ignored. Binary nodes nest to the left, so `abc` is `(ab)c`.

use std::collections::BTreeMap;
use std::fmt;

use sharpnfa::Symbol;
use thiserror::Error;

/// Maps regex literal characters to symbol ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    sigma: usize,
    to_symbol: BTreeMap<char, Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("literal `{0}` must be a lowercase letter or a digit")]
    BadChar(char),
    #[error("symbol {symbol} is out of range for sigma = {sigma}")]
    OutOfRange { symbol: usize, sigma: usize },
    #[error("literal `{0}` is mapped twice")]
    Duplicate(char),
}

impl Alphabet {
    /// No literals declared yet.
    pub fn empty(sigma: usize) -> Self {
        Self {
            sigma,
            to_symbol: BTreeMap::new(),
        }
    }

    /// `0`–`9` then `a`–`z` for symbols `0..sigma` (at most 36 of them).
    pub fn standard(sigma: usize) -> Self {
        let chars = ('0'..='9').chain('a'..='z');
        Self {
            sigma,
            to_symbol: chars.take(sigma).zip(0..=Symbol::MAX).collect(),
        }
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn insert(&mut self, c: char, symbol: usize) -> Result<(), AlphabetError> {
        if !(c.is_ascii_lowercase() || c.is_ascii_digit()) {
            return Err(AlphabetError::BadChar(c));
        }
        if symbol >= self.sigma {
            return Err(AlphabetError::OutOfRange {
                symbol,
                sigma: self.sigma,
            });
        }
        if self.to_symbol.contains_key(&c) {
            return Err(AlphabetError::Duplicate(c));
        }
        self.to_symbol.insert(c, symbol as Symbol);
        Ok(())
    }

    pub fn symbol(&self, c: char) -> Option<Symbol> {
        self.to_symbol.get(&c).copied()
    }

    /// Some literal for `s`, the smallest if several map to it.
    pub fn literal(&self, s: Symbol) -> Option<char> {
        self.to_symbol
            .iter()
            .find(|(_, &v)| v == s)
            .map(|(&c, _)| c)
    }

    pub fn is_empty(&self) -> bool {
        self.to_symbol.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    /// The empty word.
    Empty,
    Lit(Symbol),
    Concat(Box<Regex>, Box<Regex>),
    Alt(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Opt(Box<Regex>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("regex syntax error at position {position}: {message}")]
pub struct RegexError {
    /// 0-based character offset.
    pub position: usize,
    pub message: String,
}

impl Regex {
    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn alt(a: Regex, b: Regex) -> Regex {
        Regex::Alt(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex) -> Regex {
        Regex::Star(Box::new(a))
    }

    pub fn plus(a: Regex) -> Regex {
        Regex::Plus(Box::new(a))
    }

    pub fn opt(a: Regex) -> Regex {
        Regex::Opt(Box::new(a))
    }

    /// Largest symbol used, if any.
    pub fn max_symbol(&self) -> Option<Symbol> {
        match self {
            Regex::Empty => None,
            Regex::Lit(s) => Some(*s),
            Regex::Concat(a, b) | Regex::Alt(a, b) => a.max_symbol().max(b.max_symbol()),
            Regex::Star(a) | Regex::Plus(a) | Regex::Opt(a) => a.max_symbol(),
        }
    }

    /// Renders with the given alphabet; `None` if a symbol has no literal.
    pub fn render(&self, alphabet: &Alphabet) -> Option<String> {
        let mut out = String::new();
        self.write(alphabet, &mut out).then_some(out)
    }

    fn precedence(&self) -> u8 {
        match self {
            Regex::Alt(..) => 0,
            Regex::Concat(..) => 1,
            Regex::Star(_) | Regex::Plus(_) | Regex::Opt(_) => 2,
            Regex::Empty | Regex::Lit(_) => 3,
        }
    }

    fn write_child(&self, min: u8, alphabet: &Alphabet, out: &mut String) -> bool {
        if self.precedence() < min {
            out.push('(');
            let ok = self.write(alphabet, out);
            out.push(')');
            ok
        } else {
            self.write(alphabet, out)
        }
    }

    fn write(&self, alphabet: &Alphabet, out: &mut String) -> bool {
        match self {
            Regex::Empty => {
                out.push_str("()");
                true
            }
            Regex::Lit(s) => match alphabet.literal(*s) {
                Some(c) => {
                    out.push(c);
                    true
                }
                None => false,
            },
            // right operands one level tighter keep the left nesting
            Regex::Alt(a, b) => {
                let ok = a.write_child(0, alphabet, out);
                out.push('|');
                ok && b.write_child(1, alphabet, out)
            }
            Regex::Concat(a, b) => {
                a.write_child(1, alphabet, out) && b.write_child(2, alphabet, out)
            }
            Regex::Star(a) | Regex::Plus(a) | Regex::Opt(a) => {
                let ok = a.write_child(2, alphabet, out);
                out.push(match self {
                    Regex::Star(_) => '*',
                    Regex::Plus(_) => '+',
                    _ => '?',
                });
                ok
            }
        }
    }

    /// Whether `w` matches, by direct structural recursion.
    pub fn matches(&self, w: &[Symbol]) -> bool {
        self.ends(w, 0).contains(&w.len())
    }

    // all j such that w[i..j] matches
    fn ends(&self, w: &[Symbol], i: usize) -> Vec<usize> {
        let mut out = match self {
            Regex::Empty => vec![i],
            Regex::Lit(s) => {
                if w.get(i) == Some(s) {
                    vec![i + 1]
                } else {
                    vec![]
                }
            }
            Regex::Concat(a, b) => a
                .ends(w, i)
                .into_iter()
                .flat_map(|j| b.ends(w, j))
                .collect(),
            Regex::Alt(a, b) => {
                let mut v = a.ends(w, i);
                v.extend(b.ends(w, i));
                v
            }
            Regex::Opt(a) => {
                let mut v = a.ends(w, i);
                v.push(i);
                v
            }
            Regex::Star(a) | Regex::Plus(a) => {
                let mut seen = vec![false; w.len() + 1];
                let mut frontier = a.ends(w, i);
                let mut v = Vec::new();
                if matches!(self, Regex::Star(_)) {
                    seen[i] = true;
                    v.push(i);
                }
                while let Some(j) = frontier.pop() {
                    if !seen[j] {
                        seen[j] = true;
                        v.push(j);
                        frontier.extend(a.ends(w, j));
                    }
                }
                v
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphabet = Alphabet::standard(36);
        match self.render(&alphabet) {
            Some(s) => f.write_str(&s),
            None => write!(f, "{self:?}"),
        }
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(i, _)| i)
            .unwrap_or_else(|| self.chars.last().map_or(0, |&(i, _)| i + 1))
    }

    fn error(&self, message: impl Into<String>) -> RegexError {
        RegexError {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn alternation(&mut self) -> Result<Regex, RegexError> {
        let mut left = self.concatenation()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let right = self.concatenation()?;
            left = Regex::alt(left, right);
        }
        Ok(left)
    }

    fn concatenation(&mut self) -> Result<Regex, RegexError> {
        let mut left: Option<Regex> = None;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let item = self.postfix()?;
            left = Some(match left {
                None => item,
                Some(l) => Regex::concat(l, item),
            });
        }
        left.ok_or_else(|| self.error("expected an expression"))
    }

    fn postfix(&mut self) -> Result<Regex, RegexError> {
        let mut item = self.atom()?;
        while let Some(c) = self.peek() {
            item = match c {
                '*' => Regex::star(item),
                '+' => Regex::plus(item),
                '?' => Regex::opt(item),
                _ => break,
            };
            self.pos += 1;
        }
        Ok(item)
    }

    fn atom(&mut self) -> Result<Regex, RegexError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                if self.peek() == Some(')') {
                    self.pos += 1;
                    return Ok(Regex::Empty);
                }
                let inner = self.alternation()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if matches!(c, '*' | '+' | '?') => {
                Err(self.error(format!("`{c}` has nothing to repeat")))
            }
            Some(c) => match self.alphabet.symbol(c) {
                Some(s) => {
                    self.pos += 1;
                    Ok(Regex::Lit(s))
                }
                None => Err(self.error(format!("`{c}` is not in the alphabet"))),
            },
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses `text` with literals resolved through `alphabet`.
pub fn parse_regex(text: &str, alphabet: &Alphabet) -> Result<Regex, RegexError> {
    let mut p = Parser {
        chars: text
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect(),
        pos: 0,
        alphabet,
    };
    let re = p.alternation()?;
    if p.pos < p.chars.len() {
        return Err(p.error("unbalanced `)`"));
    }
    Ok(re)
}
