use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DiagnosticKind {
    UnknownTool {
        tool: String,
    },
    ArityMismatch {
        tool: String,
        expected: usize,
        got: usize,
    },
    UseBeforeDef {
        var: String,
    },
    UnusedVar {
        var: String,
    },
    StepBudgetExceeded {
        steps: usize,
        budget: usize,
    },
    /// An explanation references a line outside `1..=N`.
    OutOfRange {
        line: usize,
        steps: usize,
    },
    /// An explanation reference does not move forward through the plan.
    NonIncreasing {
        line: usize,
        previous: usize,
    },
    /// A plan step no explanation segment refers to.
    Uncovered {
        line: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based plan line; the ANSWER line is `N + 1`.
    pub line: Option<usize>,
    #[serde(flatten)]
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    pub fn error(line: Option<usize>, kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line,
            kind,
        }
    }

    pub fn warning(line: Option<usize>, kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line,
            kind,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        if let Some(line) = self.line {
            write!(f, "{sev} at line {line}: ")?;
        } else {
            write!(f, "{sev}: ")?;
        }
        match &self.kind {
            DiagnosticKind::UnknownTool { tool } => write!(f, "unknown tool `{tool}`"),
            DiagnosticKind::ArityMismatch { tool, expected, got } => {
                write!(f, "`{tool}` takes {expected} argument(s), got {got}")
            }
            DiagnosticKind::UseBeforeDef { var } => write!(f, "`{var}` used before definition"),
            DiagnosticKind::UnusedVar { var } => write!(f, "`{var}` is never used"),
            DiagnosticKind::StepBudgetExceeded { steps, budget } => {
                write!(f, "{steps} steps exceed the budget of {budget}")
            }
            DiagnosticKind::OutOfRange { line, steps } => {
                write!(f, "reference ###{line} is outside 1..={steps}")
            }
            DiagnosticKind::NonIncreasing { line, previous } => {
                write!(f, "reference ###{line} does not follow ###{previous}")
            }
            DiagnosticKind::Uncovered { line } => write!(f, "step {line} is never referenced"),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
