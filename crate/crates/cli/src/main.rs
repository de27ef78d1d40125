use std::collections::BTreeMap;
use std::io::Read;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use divergence_core::check::{check_comb, check_profile, Predicate};
use divergence_core::comb::{comb_rat_inf_report, comb_spe, export_profile, CombChoiceWord, WitnessBounds};
use divergence_core::engine::Verdict;
use divergence_core::families::{build_family, unfold_profile, EndingOption, FamilyBundle, FamilyGame, NamedProfile};
use divergence_core::finite::{enumerate_profiles, FiniteProfile, GameTemplate};
use divergence_core::textio::{parse_profile, serialize_profile, Format};
use divergence_core::Profile;

#[derive(Parser)]
#[command(name = "divergence", version, about = "Decide convergence, equilibrium and rationality of strategy profiles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a predicate on a profile document (`-` reads stdin).
    Check {
        #[arg(long)]
        pred: PredArg,
        input: String,
    },
    /// List every profile of a finite document's game that satisfies a predicate.
    Enumerate {
        #[arg(long)]
        pred: PredArg,
        input: String,
    },
    /// Inspect a named game: list its profiles, check one, or print it.
    Family {
        name: String,
        /// Family parameter, e.g. `--param omega=3`.
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
        params: Vec<(String, String)>,
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, conflicts_with = "emit", requires = "profile")]
        check: Option<PredArg>,
        #[arg(long, requires = "profile")]
        emit: Option<EmitArg>,
        /// With --check spe/ratinf on a comb, print the certificate or witnesses.
        #[arg(long, requires = "check")]
        explain: bool,
    },
    /// Truncate a comb family after `depth` stages and print the finite profile.
    Unfold {
        #[arg(long)]
        family: String,
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
        params: Vec<(String, String)>,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        ending: EndingArg,
        /// Named profile of the family or a choice word such as `pp(t)`; all-take by default.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value = "text")]
        emit: EmitArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PredArg {
    Conv,
    AlwaysConv,
    Div,
    Pe,
    Spe,
    Bi,
    #[value(name = "ratf")]
    RatF,
    #[value(name = "ratinf")]
    RatInf,
}

impl From<PredArg> for Predicate {
    fn from(p: PredArg) -> Predicate {
        match p {
            PredArg::Conv => Predicate::Conv,
            PredArg::AlwaysConv => Predicate::AlwaysConv,
            PredArg::Div => Predicate::Div,
            PredArg::Pe => Predicate::Pe,
            PredArg::Spe => Predicate::Spe,
            PredArg::Bi => Predicate::Bi,
            PredArg::RatF => Predicate::RatF,
            PredArg::RatInf => Predicate::RatInf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Text,
    Dot,
}

impl From<EmitArg> for Format {
    fn from(e: EmitArg) -> Format {
        match e {
            EmitArg::Text => Format::Text,
            EmitArg::Dot => Format::Dot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EndingArg {
    Takeall,
    Choice2b,
    Nothing,
}

impl From<EndingArg> for EndingOption {
    fn from(e: EndingArg) -> EndingOption {
        match e {
            EndingArg::Takeall => EndingOption::TakeAll,
            EndingArg::Choice2b => EndingOption::Choice2b,
            EndingArg::Nothing => EndingOption::Nothing,
        }
    }
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

enum Failure {
    /// Unreadable or malformed input.
    Input(String),
    /// A flag value the command cannot use.
    Usage(String),
}

type Outcome = Result<Option<Verdict>, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    match run(cli.cmd) {
        Ok(Some(Verdict::UnknownAtBound(_))) => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\n{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Check { pred, input } => {
            let s = load(&input)?;
            let v = check_profile(&s, pred.into()).map_err(|e| Failure::Input(e.to_string()))?;
            println!("{v}");
            Ok(Some(v))
        }
        Cmd::Enumerate { pred, input } => {
            let s = load(&input)?;
            enumerate(&s, pred.into())
        }
        Cmd::Family { name, params, profile, check, emit, explain } => {
            let bundle = family(&name, params)?;
            match (profile, check, emit) {
                (None, _, _) => {
                    describe(&bundle);
                    Ok(None)
                }
                (Some(p), Some(pred), _) => family_check(&bundle, &p, pred.into(), explain),
                (Some(p), None, Some(fmt)) => {
                    let s = match lookup(&bundle, &p)? {
                        NamedProfile::Profile(s) => s.clone(),
                        NamedProfile::Word(w) => {
                            let spec = bundle.comb().expect("words belong to combs");
                            export_profile(spec, w).map_err(|e| {
                                Failure::Input(format!("{e}; use `divergence unfold` for a finite truncation"))
                            })?
                        }
                    };
                    print!("{}", serialize_profile(&s, fmt.into()));
                    Ok(None)
                }
                (Some(_), None, None) => Err(Failure::Usage("--profile needs --check or --emit".into())),
            }
        }
        Cmd::Unfold { family: name, params, depth, ending, profile, emit } => {
            let bundle = family(&name, params)?;
            let spec = bundle
                .comb()
                .ok_or_else(|| Failure::Usage(format!("{name} is not a comb family")))?;
            let w = match profile {
                None => CombChoiceWord::all_take(),
                Some(p) => match bundle.profiles.get(&p) {
                    Some(NamedProfile::Word(w)) => w.clone(),
                    _ => p.parse().map_err(|e: divergence_core::comb::CombError| Failure::Usage(e.to_string()))?,
                },
            };
            let f = unfold_profile(spec, depth, ending.into(), &w).map_err(|e| Failure::Usage(e.to_string()))?;
            print!("{}", serialize_profile(f.profile(), emit.into()));
            Ok(None)
        }
    }
}

fn load(input: &str) -> Result<Profile, Failure> {
    let (text, label) = if input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        (buf, "<stdin>".to_string())
    } else {
        let text = std::fs::read_to_string(input).map_err(|e| Failure::Input(format!("{input}: {e}")))?;
        (text, input.to_string())
    };
    parse_profile(&text).map_err(|e| Failure::Input(format!("{label}:{}: {}", e.line, e.message)))
}

fn enumerate(s: &Profile, pred: Predicate) -> Outcome {
    let f = FiniteProfile::new(s.clone()).map_err(|e| Failure::Input(e.to_string()))?;
    let g = GameTemplate::new(&f).map_err(|e| Failure::Input(e.to_string()))?;
    let all = enumerate_profiles(&g).map_err(|e| Failure::Input(e.to_string()))?;
    let total = all.len();
    let mut found = 0;
    for (mask, p) in all.enumerate() {
        let v = check_profile(p.profile(), pred).map_err(|e| Failure::Input(e.to_string()))?;
        if v == Verdict::Holds {
            found += 1;
            println!("# profile {mask} satisfies {pred}");
            println!("{}", serialize_profile(p.profile(), Format::Text));
        }
    }
    println!("# {found} of {total} profiles satisfy {pred}");
    Ok(None)
}

fn family(name: &str, params: Vec<(String, String)>) -> Result<FamilyBundle, Failure> {
    let params: BTreeMap<String, String> = params.into_iter().collect();
    build_family(name, &params).map_err(|e| Failure::Usage(e.to_string()))
}

fn lookup<'a>(bundle: &'a FamilyBundle, name: &str) -> Result<&'a NamedProfile, Failure> {
    bundle.profile(name).map_err(|e| Failure::Usage(e.to_string()))
}

fn describe(bundle: &FamilyBundle) {
    let kind = match &bundle.game {
        FamilyGame::Comb(c) if c.is_regular() => "comb game (rational)",
        FamilyGame::Comb(_) => "comb game (non-regular)",
        FamilyGame::Finite(_) => "finite game",
        FamilyGame::Collection => "collection of profiles",
    };
    println!("{}: {kind}", bundle.name);
    if let FamilyGame::Comb(c) = &bundle.game {
        let stages: Vec<String> = (0..6)
            .map(|j| {
                let vals: Vec<String> = c.take_at(j).iter().map(|u| u.to_string()).collect();
                format!("({})", vals.join(","))
            })
            .collect();
        println!("take leaves from stage 0: {} ...", stages.join(" "));
    }
    for (name, p) in &bundle.profiles {
        match p {
            NamedProfile::Word(w) => println!("  {name}  {w}"),
            NamedProfile::Profile(_) => println!("  {name}"),
        }
    }
}

fn family_check(bundle: &FamilyBundle, profile: &str, pred: Predicate, explain: bool) -> Outcome {
    let v = match lookup(bundle, profile)? {
        NamedProfile::Profile(s) => check_profile(s, pred),
        NamedProfile::Word(w) => check_comb(bundle.comb().expect("words belong to combs"), w, pred),
    }
    .map_err(|e| Failure::Input(e.to_string()))?;
    println!("{v}");
    if explain {
        if let NamedProfile::Word(w) = lookup(bundle, profile)? {
            let spec = bundle.comb().expect("words belong to combs");
            match pred {
                Predicate::RatInf => println!("{}", comb_rat_inf_report(spec, w, WitnessBounds::default())),
                _ => println!("{}", comb_spe(spec, w)),
            }
        }
    }
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_split_on_first_equals() {
        assert_eq!(parse_param("omega=3"), Ok(("omega".into(), "3".into())));
        assert_eq!(parse_param(" k = a=b "), Ok(("k".into(), "a=b".into())));
        assert!(parse_param("omega").is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["divergence", "unfold", "--family", "infpede", "--depth", "3", "--ending", "choice2b"]).unwrap();
        assert!(matches!(cli.cmd, Cmd::Unfold { depth: 3, ending: EndingArg::Choice2b, .. }));
        assert!(Cli::try_parse_from(["divergence", "family", "infpede", "--check", "spe"]).is_err());
        assert!(Cli::try_parse_from(["divergence", "check", "--pred", "ratinf", "-"]).is_ok());
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_family_is_a_usage_error() {
        assert!(matches!(family("nosuch", vec![]), Err(Failure::Usage(_))));
    }
}
