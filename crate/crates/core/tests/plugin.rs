#![cfg(unix)]

use std::time::Duration;

use linescan::detect::PlateDetector;
use linescan::plugin::PluginDetector;
use linescan::Frame;

fn sh(script: &str, timeout_ms: u64) -> PluginDetector {
    PluginDetector::spawn(
        "sh",
        &["-c".to_string(), script.to_string()],
        Duration::from_millis(timeout_ms),
    )
    .unwrap()
}

const ECHO: &str = r#"
while read cmd w h; do
  [ "$cmd" = DETECT ] || exit 3
  head -c $((w * h)) > /dev/null
  printf '1 1 %d %d 0.75 ABC1234\n2 0 3 1 0.5\n\n' "$w" "$h"
done
"#;

#[test]
fn replies_parse_and_requests_stay_in_sync() {
    let p = sh(ECHO, 5000);
    for (i, (w, h)) in [(8, 4), (20, 10), (3, 2)].into_iter().enumerate() {
        let f = Frame::filled(i as u64, w, h, 9);
        let d = p.detect(&f).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(
            (d[0].x0, d[0].y0, d[0].x1, d[0].y1),
            (1, 1, w as u32, h as u32)
        );
        assert_eq!(d[0].confidence, 0.75);
        assert_eq!(d[0].text.as_deref(), Some("ABC1234"));
        assert!(d[1].text.is_none());
    }
}

#[test]
fn malformed_reply_is_an_error_but_not_fatal() {
    let script = r#"
n=0
while read cmd w h; do
  head -c $((w * h)) > /dev/null
  n=$((n + 1))
  if [ $n -eq 1 ]; then printf 'not a box\n\n'; else printf '0 0 2 2 0.9\n\n'; fi
done
"#;
    let p = sh(script, 5000);
    let f = Frame::filled(0, 4, 4, 0);
    assert!(p.detect(&f).is_err());
    assert_eq!(p.detect(&f).unwrap().len(), 1);
}

#[test]
fn timeout_kills_the_plugin() {
    let p = sh("read cmd w h; head -c $((w * h)) > /dev/null; sleep 5", 200);
    let f = Frame::filled(0, 4, 4, 0);
    let start = std::time::Instant::now();
    let e = p.detect(&f).unwrap_err();
    assert!(start.elapsed() < Duration::from_secs(3));
    assert!(e.to_string().contains("no reply"), "{e}");
    assert!(p.detect(&f).is_err());
}

#[test]
fn early_exit_is_reported() {
    let p = sh("exit 0", 2000);
    assert!(p.detect(&Frame::filled(0, 4, 4, 0)).is_err());
}

#[test]
fn missing_program() {
    assert!(PluginDetector::spawn("/nonexistent/plugin", &[], Duration::from_secs(1)).is_err());
}
