//! Config files for the command line.
//!
//! One `key = value` pair per line. Keys are long flag names without the
//! leading dashes (`degree = 2`, `method = ridge`). A switch is written as
//! `key = true` and left out by `key = false`. Blank lines and text after
//! `#` are ignored. Flags given on the command line win over the file.

use std::path::Path;

use crate::error::{Error, Result};
use crate::textfmt::read_text;

/// Turns config text into flag arguments, in file order.
pub fn parse_config(text: &str, path: &Path) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(Error::Usage(format!("{}:{}: bad key `{key}`", path.display(), i + 1)));
        }
        if key == "config" {
            return Err(Error::Usage(format!(
                "{}:{}: config files cannot nest",
                path.display(),
                i + 1
            )));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            v => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
        }
    }
    Ok(args)
}

pub fn load_config(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path).map_err(|e| Error::Usage(e.to_string()))?;
    parse_config(&text, path)
}

/// Finds `--config <path>` or `--config=<path>` in raw arguments and
/// splices the file's flags in right after the subcommand name, so that
/// later command-line flags override them.
pub fn expand_config_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut it = args.iter().enumerate();
    while let Some((i, a)) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            let p = args
                .get(i + 1)
                .ok_or_else(|| Error::Usage("--config needs a path".into()))?;
            path = Some(p.clone());
            it.next();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let extra = load_config(Path::new(&path))?;
    // args[0] is the program, args[1] the subcommand
    let at = args.len().min(2);
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
