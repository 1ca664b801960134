use super::ast::*;
use super::lexer::{lex, Tok};
use super::{Diagnostic, LustreError, Span};
use crate::logic::Sort;

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

type PResult<T> = Result<T, LustreError>;

pub fn parse(text: &str) -> Result<Program, LustreError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    p.program()
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Real(r) => format!("`{r}`"),
        Tok::Kw(k) => format!("`{k}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Realizable => "`--%REALIZABLE`".into(),
        Tok::Property => "`--%PROPERTY`".into(),
        Tok::Eof => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(LustreError::Syntax(Diagnostic::error(
            self.span(),
            format!("expected {expected}, found {}", describe(self.peek())),
        )))
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        let sp = self.span();
        if self.eat_sym(s) {
            Ok(sp)
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<Span> {
        let sp = self.span();
        if self.eat_kw(k) {
            Ok(sp)
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.span();
                self.bump();
                Ok((s, sp))
            }
            _ => self.error("an identifier"),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Kw("const") => items.push(Item::Const(self.const_decl()?)),
                Tok::Kw("node") | Tok::Kw("function") => items.push(Item::Node(self.node()?)),
                Tok::Realizable | Tok::Property => items.push(Item::Directive(self.directive()?)),
                _ => return self.error("`const`, `node` or a directive"),
            }
        }
        if items.is_empty() {
            return self.error("a declaration");
        }
        Ok(Program { items })
    }

    fn directive(&mut self) -> PResult<Directive> {
        let (t, sp) = self.bump();
        let d = match t {
            Tok::Realizable => {
                let mut names = vec![self.ident()?];
                while self.eat_sym(",") {
                    names.push(self.ident()?);
                }
                Directive::Realizable(names)
            }
            Tok::Property => {
                let (n, s) = self.ident()?;
                Directive::Property(n, s)
            }
            _ => {
                return Err(LustreError::Syntax(Diagnostic::error(sp, "expected a directive")));
            }
        };
        self.expect_sym(";")?;
        Ok(d)
    }

    fn const_decl(&mut self) -> PResult<ConstDecl> {
        let span = self.expect_kw("const")?;
        let (name, _) = self.ident()?;
        let sort = if self.eat_sym(":") { Some(self.sort()?) } else { None };
        self.expect_sym("=")?;
        let value = self.expr()?;
        self.expect_sym(";")?;
        Ok(ConstDecl { name, sort, value, span })
    }

    fn sort(&mut self) -> PResult<Sort> {
        if self.eat_kw("bool") {
            Ok(Sort::Bool)
        } else if self.eat_kw("int") {
            Ok(Sort::Int)
        } else if self.eat_kw("real") {
            Ok(Sort::Real)
        } else {
            self.error("a type (`bool`, `int` or `real`)")
        }
    }

    /// `a, b : real; c : int` (possibly empty when `close` follows).
    fn decl_groups(&mut self, close: Option<&str>) -> PResult<Vec<Decl>> {
        let mut out = Vec::new();
        if let Some(c) = close {
            if self.at_sym(c) {
                return Ok(out);
            }
        }
        loop {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let sort = self.sort()?;
            out.extend(names.into_iter().map(|(name, span)| Decl { name, sort, span }));
            match close {
                Some(c) => {
                    if self.eat_sym(";") {
                        if self.at_sym(c) {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                None => {
                    self.expect_sym(";")?;
                    if !matches!(self.peek(), Tok::Ident(_)) {
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    fn node(&mut self) -> PResult<Node> {
        let span = self.span();
        self.bump();
        let (name, _) = self.ident()?;
        self.expect_sym("(")?;
        let params = self.decl_groups(Some(")"))?;
        self.expect_sym(")")?;
        self.expect_kw("returns")?;
        self.expect_sym("(")?;
        let returns = self.decl_groups(Some(")"))?;
        self.expect_sym(")")?;
        self.eat_sym(";");
        let mut locals = Vec::new();
        while self.eat_kw("var") {
            locals.extend(self.decl_groups(None)?);
        }
        self.expect_kw("let")?;
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Kw("tel") => break,
                Tok::Realizable | Tok::Property => body.push(Statement::Directive(self.directive()?)),
                Tok::Kw("assert") => {
                    let sp = self.span();
                    self.bump();
                    let e = self.expr()?;
                    self.expect_sym(";")?;
                    body.push(Statement::Assert(e, sp));
                }
                Tok::Ident(_) => {
                    let (lhs, sp) = self.ident()?;
                    self.expect_sym("=")?;
                    let rhs = self.expr()?;
                    self.expect_sym(";")?;
                    body.push(Statement::Equation { lhs, rhs, span: sp });
                }
                Tok::Sym("(") => {
                    // `(x) = e;`
                    self.bump();
                    let (lhs, sp) = self.ident()?;
                    self.expect_sym(")")?;
                    self.expect_sym("=")?;
                    let rhs = self.expr()?;
                    self.expect_sym(";")?;
                    body.push(Statement::Equation { lhs, rhs, span: sp });
                }
                _ => return self.error("an equation, `assert` or `tel`"),
            }
        }
        self.expect_kw("tel")?;
        self.eat_sym(";");
        Ok(Node { name, params, returns, locals, body, span })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        if self.at_kw("if") {
            let sp = self.span();
            self.bump();
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Expr::new(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)), sp));
        }
        self.arrow()
    }

    fn arrow(&mut self) -> PResult<Expr> {
        let lhs = self.implies()?;
        if self.at_sym("->") {
            let sp = self.span();
            self.bump();
            let rhs = self.expr()?;
            return Ok(Expr::new(ExprKind::Arrow(Box::new(lhs), Box::new(rhs)), sp));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.at_sym("=>") {
            let sp = self.span();
            self.bump();
            let rhs = if self.at_kw("if") { self.expr()? } else { self.implies()? };
            return Ok(bin(BinOp::Implies, lhs, rhs, sp));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        loop {
            let op = if self.at_kw("or") {
                BinOp::Or
            } else if self.at_kw("xor") {
                BinOp::Xor
            } else {
                return Ok(lhs);
            };
            let sp = self.span();
            self.bump();
            let rhs = self.and()?;
            lhs = bin(op, lhs, rhs, sp);
        }
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while self.at_kw("and") {
            let sp = self.span();
            self.bump();
            let rhs = self.not()?;
            lhs = bin(BinOp::And, lhs, rhs, sp);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.at_kw("not") {
            let sp = self.span();
            self.bump();
            let e = self.not()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), sp));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("<>") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        let sp = self.span();
        self.bump();
        let rhs = self.additive()?;
        Ok(bin(op, lhs, rhs, sp))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let sp = self.span();
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = bin(op, lhs, rhs, sp);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Kw("div") => BinOp::IntDiv,
                Tok::Kw("mod") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            let sp = self.span();
            self.bump();
            let rhs = self.unary()?;
            lhs = bin(op, lhs, rhs, sp);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.at_sym("-") {
            let sp = self.span();
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), sp));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), sp))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Expr::new(ExprKind::Real(r), sp))
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(true), sp))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(false), sp))
            }
            Tok::Kw("pre") => {
                self.bump();
                let e = self.primary()?;
                Ok(Expr::new(ExprKind::Pre(Box::new(e)), sp))
            }
            Tok::Kw("if") => self.expr(),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.at_sym(")") {
                        args.push(self.expr()?);
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(")")?;
                    Ok(Expr::new(ExprKind::Call(name, args), sp))
                } else {
                    Ok(Expr::new(ExprKind::Ident(name), sp))
                }
            }
            _ => self.error("an expression"),
        }
    }
}

fn bin(op: BinOp, a: Expr, b: Expr, span: Span) -> Expr {
    Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_node() {
        let p = parse("node n() returns (p: bool); let p = true; tel;").unwrap();
        let n = p.node("n").unwrap();
        assert!(n.params.is_empty());
        assert_eq!(n.returns.len(), 1);
        assert_eq!(n.equations().count(), 1);
    }

    #[test]
    fn missing_tel_reports_end_of_input() {
        let e = parse("node n() returns (p: bool); let p = true;").unwrap_err();
        let LustreError::Syntax(d) = e else { panic!("{e:?}") };
        assert!(d.message.contains("end of input"), "{}", d.message);
        assert_eq!(d.span.line, 1);
    }

    #[test]
    fn precedence() {
        let p = parse("node n(a, b: int) returns (p: bool); let p = a + b * 2 <= 3 and not a = b -> false; tel;")
            .unwrap();
        let (_, rhs, _) = p.node("n").unwrap().equations().next().unwrap();
        let ExprKind::Arrow(l, _) = &rhs.kind else { panic!("{rhs:?}") };
        let ExprKind::Binary(BinOp::And, cmp, neg) = &l.kind else { panic!() };
        assert!(matches!(cmp.kind, ExprKind::Binary(BinOp::Le, _, _)));
        assert!(matches!(neg.kind, ExprKind::Unary(UnOp::Not, _)));
    }
}
