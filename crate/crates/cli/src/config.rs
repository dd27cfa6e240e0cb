use std::ffi::OsString;

use anyhow::{bail, Context, Result};

use crate::args::COMMANDS;

/// Flags without a value; the file spells them `key=true` or `key=false`.
const SWITCHES: [&str; 3] = ["allow-unsafe-no-split", "timing", "formula"];

/// Splices `--config` file entries into `argv` right after the subcommand.
/// Keys already given on the command line are skipped, so flags override the
/// file. A `command` key supplies the subcommand when `argv` has none.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let Some(path) = config_path(&strs) else {
        return Ok(argv);
    };
    let entries =
        hdlrt::io::load_config(&path).with_context(|| format!("reading config file {path}"))?;
    let given: Vec<&str> = strs
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();

    let mut command = None;
    let mut extra = Vec::new();
    for (key, value) in entries {
        let key = key.replace('_', "-");
        if key == "command" {
            command = Some(value);
            continue;
        }
        if key == "config" || given.contains(&key.as_str()) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => extra.push(format!("--{key}")),
                "false" | "no" | "off" | "0" => {}
                _ => bail!("config key `{key}` expects true or false, got `{value}`"),
            }
        } else {
            extra.push(format!("--{key}={value}"));
        }
    }

    let mut out: Vec<String> = strs.clone();
    match strs.iter().position(|a| COMMANDS.contains(&a.as_str())) {
        Some(pos) => {
            out.splice(pos + 1..pos + 1, extra);
        }
        None => {
            let cmd =
                command.context("no subcommand given on the command line or in the config file")?;
            out.push(cmd);
            out.extend(extra);
        }
    }
    Ok(out.into_iter().map(OsString::from).collect())
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn file_values_follow_subcommand_and_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# run\nn=100\np=10\nm = 5\nr=2\nallow_unsafe_no_split=true\ntiming=false\n",
        )
        .unwrap();
        let argv = os(&[
            "hdlrt",
            "--config",
            path.to_str().unwrap(),
            "boundary",
            "--m",
            "2",
        ]);
        let merged: Vec<String> = merge_config(argv)
            .unwrap()
            .into_iter()
            .map(|a| a.into_string().unwrap())
            .collect();
        assert_eq!(
            &merged[3..],
            [
                "boundary",
                "--n=100",
                "--p=10",
                "--r=2",
                "--allow-unsafe-no-split",
                "--m",
                "2"
            ]
        );
    }

    #[test]
    fn command_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "command=boundary\nn=100\n").unwrap();
        let merged = merge_config(os(&["hdlrt", &format!("--config={}", path.display())])).unwrap();
        assert_eq!(merged[2], "boundary");
        assert_eq!(merged[3], "--n=100");
    }

    #[test]
    fn no_config_is_identity() {
        let argv = os(&["hdlrt", "boundary", "--n", "3"]);
        assert_eq!(merge_config(argv.clone()).unwrap(), argv);
    }
}
