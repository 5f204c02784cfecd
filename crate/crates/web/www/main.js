import init, { timeline_svg, mcm_sweep_svg, learn_ldd_json } from "./pkg/ddlab_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
  }
}

function drawTimeline() {
  const out = $("tl-out");
  guard(out, () => {
    out.innerHTML = timeline_svg(
      $("tl-kind").value,
      num("tl-window"),
      num("tl-theta") * Math.PI,
      num("tl-phi") * Math.PI,
      num("tl-lambda") * Math.PI,
    );
  });
}

function runSweep() {
  const out = $("sw-out");
  out.textContent = "simulating...";
  // let the message paint before the synchronous call blocks
  setTimeout(() => guard(out, () => {
    out.innerHTML = mcm_sweep_svg(num("sw-r"), num("sw-t1"), num("sw-t2"), num("sw-kick"), num("sw-deph"));
  }), 10);
}

function costPlot(costs) {
  const w = 720, h = 220, pad = 40;
  const hi = Math.max(...costs, 0.01);
  const x = (k) => pad + (k / Math.max(costs.length - 1, 1)) * (w - 2 * pad);
  const y = (c) => h - pad - (c / hi) * (h - 2 * pad);
  const pts = costs.map((c, k) => `${x(k).toFixed(1)},${y(c).toFixed(1)}`).join(" ");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${w}" height="${h}" font-family="sans-serif" font-size="11">
    <line x1="${pad}" y1="${h - pad}" x2="${w - pad}" y2="${h - pad}" stroke="#333"/>
    <line x1="${pad}" y1="${pad}" x2="${pad}" y2="${h - pad}" stroke="#333"/>
    <text x="${w / 2}" y="${h - 8}" text-anchor="middle">iteration</text>
    <text x="${pad - 6}" y="${pad}" text-anchor="end">${hi.toFixed(2)}</text>
    <text x="${pad - 6}" y="${h - pad}" text-anchor="end">0</text>
    <text x="12" y="${h / 2}" transform="rotate(-90 12 ${h / 2})" text-anchor="middle">cost</text>
    <polyline points="${pts}" fill="none" stroke="#1f77b4"/>
  </svg>`;
}

function runLearning() {
  const out = $("ld-out");
  out.textContent = "optimising...";
  setTimeout(() => guard(out, () => {
    const res = JSON.parse(learn_ldd_json(
      num("ld-r"), num("ld-it"), num("ld-shots"), BigInt(num("ld-seed")), num("ld-kick"), num("ld-deph"),
    ));
    const [t, p, l] = res.angles_over_pi.map((a) => a.toFixed(3));
    const rows = [["ldd", res.fidelity], ...res.references]
      .map(([k, f]) => `<tr><th>${k}</th><td>${f.toFixed(4)}</td></tr>`)
      .join("");
    out.innerHTML = costPlot(res.costs) +
      `<p>learned (θ, φ, λ)/π = (${t}, ${p}, ${l})</p>` +
      `<table><tr><th>sequence</th><th>exact fidelity</th></tr>${rows}</table>`;
  }), 10);
}

await init();
for (const id of ["tl-kind", "tl-window", "tl-theta", "tl-phi", "tl-lambda"]) {
  $(id).addEventListener("input", drawTimeline);
}
$("sw-run").addEventListener("click", runSweep);
$("ld-run").addEventListener("click", runLearning);
drawTimeline();
