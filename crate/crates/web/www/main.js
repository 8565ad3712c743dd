import init, { quality_vs_eta, dark_sweep, response_matrix } from "./pkg/pnrq_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"];

function detectorJson() {
  const kind = $("kind").value;
  const click = { eta: +$("eta").value, dark_prob: +$("dark").value };
  switch (kind) {
    case "spatial":
      return { detector: "spatial", elements: +$("elements").value, click };
    case "temporal":
      return { detector: "temporal", effective_segments: +$("elements").value,
        coupler_efficiency: +$("coupler").value, click };
    default:
      return { detector: "loop", exit_prob: +$("exit").value, loop_survival: +$("survival").value,
        max_loops: +$("loops").value, click };
  }
}

function showFields() {
  const kind = $("kind").value;
  document.querySelectorAll(".arr").forEach((e) => e.classList.toggle("hidden", kind === "loop"));
  document.querySelectorAll(".tmp").forEach((e) => e.classList.toggle("hidden", kind !== "temporal"));
  document.querySelectorAll(".lp").forEach((e) => e.classList.toggle("hidden", kind !== "loop"));
}

function plot(canvas, curve, xLabel) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const pad = { l: 46, r: 70, t: 12, b: 36 };
  const x0 = curve.x[0], x1 = curve.x[curve.x.length - 1];
  const px = (x) => pad.l + ((x - x0) / (x1 - x0)) * (W - pad.l - pad.r);
  const py = (y) => H - pad.b - y * (H - pad.t - pad.b);
  ctx.clearRect(0, 0, W, H);
  ctx.font = "11px sans-serif";
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, H - pad.b);
  ctx.lineTo(W - pad.r, H - pad.b);
  ctx.stroke();
  for (let i = 0; i <= 5; i++) {
    const y = i / 5;
    ctx.fillText(y.toFixed(1), 8, py(y) + 4);
    const x = x0 + (i / 5) * (x1 - x0);
    ctx.fillText(x.toPrecision(3), px(x) - 10, H - pad.b + 14);
  }
  ctx.fillText(xLabel, (W - pad.r) / 2, H - 6);
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(pad.l, py(0.5));
  ctx.lineTo(W - pad.r, py(0.5));
  ctx.stroke();
  ctx.setLineDash([]);
  curve.series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 1.8;
    ctx.beginPath();
    s.q.forEach((q, j) => (j ? ctx.lineTo(px(curve.x[j]), py(q)) : ctx.moveTo(px(curve.x[j]), py(q))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(`Q${s.n}`, W - pad.r + 8, pad.t + 14 * (i + 1));
  });
  ctx.lineWidth = 1;
}

function matrixTable(m) {
  const cols = [...Array(m.m_max + 1).keys()];
  const head = `<tr><th>k \\ m</th>${cols.map((c) => `<th>${c}</th>`).join("")}</tr>`;
  const body = m.rows.map((row, k) => {
    const label = k === m.n_out ? `&ge;${k}` : k;
    const cells = row.map((v, j) => {
      const shade = Math.round(255 - 155 * v);
      const bold = (k === Math.min(j, m.n_out)) ? "font-weight:bold;" : "";
      return `<td style="background:rgb(${shade},${shade},255);${bold}">${v.toFixed(4)}</td>`;
    });
    return `<tr><th>${label}</th>${cells.join("")}</tr>`;
  });
  $("matrix").innerHTML = head + body.join("");
  $("matrix-info").textContent =
    `Q${m.n_out} over all distributions = ${m.quality_full.toFixed(5)}, ` +
    `over Poisson inputs with mean <= ${m.n_out} = ${m.quality_poisson.toFixed(5)}. Bold cells are the desired outputs.`;
}

function run() {
  $("error").textContent = "";
  const det = JSON.stringify(detectorJson());
  const set = $("set").value;
  const nmax = +$("nmax").value;
  try {
    plot($("eta-plot"), JSON.parse(quality_vs_eta(det, set, nmax, 0.5, 1.0, 41)), "efficiency η");
    plot($("dark-plot"), JSON.parse(dark_sweep(det, set, nmax, 0.1, 41)), "dark-count probability");
    matrixTable(JSON.parse(response_matrix(det, nmax, 16)));
  } catch (e) {
    $("error").textContent = String(e);
  }
}

await init();
$("kind").addEventListener("change", showFields);
$("run").addEventListener("click", run);
showFields();
run();
