import init, { variables, posterior, generateNetwork, errorCurve } from "./pkg/popweave_web.js";

const $ = (id) => document.getElementById(id);
const COLOURS = {
  spouses: "#d62728", motherOf: "#1f77b4", colleagues: "#2ca02c", friends: "#ff7f0e",
  fatherOf: "#9467bd", siblings: "#17becf", friendsOfFriends: "#bcbd22",
};
const SHOWN = ["gender", "ageSlices", "married", "work", "location",
  "RC_spouses", "RC_motherOf", "RC_colleagues", "RC_friends"];

// Let the status text paint before a blocking call.
const later = (f) => new Promise((resolve) => setTimeout(() => resolve(f()), 20));

function setupEvidence(vars) {
  const box = $("evidence");
  for (const v of vars.filter((v) => SHOWN.includes(v.name))) {
    const label = document.createElement("label");
    label.textContent = v.name + " ";
    const select = document.createElement("select");
    select.dataset.name = v.name;
    select.append(new Option("any", ""));
    for (const d of v.domain) select.append(new Option(d, d));
    select.addEventListener("change", () => updatePosterior(vars));
    label.append(select);
    box.append(label);
  }
}

function updatePosterior(vars) {
  const evidence = {};
  for (const s of document.querySelectorAll("#evidence select")) {
    if (s.value) evidence[s.dataset.name] = s.value;
  }
  const result = JSON.parse(posterior(JSON.stringify(evidence)));
  const status = $("evidence-status");
  const out = $("marginals");
  if (result.error) {
    status.textContent = result.error;
    status.className = "error";
    return;
  }
  status.className = "";
  status.textContent = `p(evidence) = ${result.evidence_probability.toPrecision(4)}`;
  out.replaceChildren();
  for (const v of vars.filter((v) => SHOWN.includes(v.name))) {
    const probs = result.marginals[v.name];
    const div = document.createElement("div");
    div.className = "marg";
    div.innerHTML = `<h3>${v.name}</h3>`;
    const grid = document.createElement("div");
    grid.className = "bars";
    v.domain.forEach((label, i) => {
      if (probs[i] === 0 && v.domain.length > 8) return;
      grid.insertAdjacentHTML("beforeend",
        `<span>${label}</span><div><div class="bar" style="width:${(probs[i] * 100).toFixed(1)}%"></div></div>` +
        `<span>${probs[i].toFixed(3)}</span>`);
    });
    div.append(grid);
    out.append(div);
  }
}

function table(el, rows) {
  el.innerHTML = rows.map((r) => "<tr>" + r.map((c, i) =>
    i === 0 ? `<th>${c}</th>` : `<td class="num">${c}</td>`).join("") + "</tr>").join("");
}

function drawEgo(ego, focus) {
  const canvas = $("ego");
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const rings = [[], [], []];
  for (const n of ego.nodes) rings[n.hop].push(n);
  const pos = new Map();
  rings.forEach((ring, hop) => {
    const r = hop * 0.22 * w;
    ring.forEach((n, i) => {
      const a = (2 * Math.PI * i) / ring.length + hop * 0.3;
      pos.set(n.id, [w / 2 + r * Math.cos(a), h / 2 + r * Math.sin(a)]);
    });
  });
  for (const e of ego.edges) {
    const [x1, y1] = pos.get(e.a), [x2, y2] = pos.get(e.b);
    ctx.strokeStyle = COLOURS[e.link_type] || "#999";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(x1, y1);
    ctx.lineTo(x2, y2);
    ctx.stroke();
    if (e.directed) {
      const t = 0.8, ang = Math.atan2(y2 - y1, x2 - x1);
      const ax = x1 + (x2 - x1) * t, ay = y1 + (y2 - y1) * t;
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(ax - 7 * Math.cos(ang - 0.4), ay - 7 * Math.sin(ang - 0.4));
      ctx.lineTo(ax - 7 * Math.cos(ang + 0.4), ay - 7 * Math.sin(ang + 0.4));
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fill();
    }
  }
  ctx.font = "10px system-ui";
  for (const n of ego.nodes) {
    const [x, y] = pos.get(n.id);
    ctx.fillStyle = n.id === focus ? "#000" : "#555";
    ctx.beginPath();
    ctx.arc(x, y, n.hop === 0 ? 6 : 4, 0, 2 * Math.PI);
    ctx.fill();
    if (n.hop < 2) ctx.fillText(n.label, x + 6, y - 4);
  }
  $("legend").innerHTML = Object.entries(COLOURS)
    .map(([t, c]) => `<span><i style="background:${c}"></i>${t}</span>`).join("");
}

async function runGenerate() {
  const n = Number($("gen-n").value), seed = Number($("gen-seed").value);
  const focusText = $("gen-focus").value;
  const focus = focusText === "" ? 4294967295 : Number(focusText);
  const status = $("gen-status");
  status.textContent = "running...";
  status.className = "";
  const t = performance.now();
  const result = JSON.parse(await later(() => generateNetwork(n, BigInt(seed), focus)));
  if (result.error) {
    status.textContent = result.error;
    status.className = "error";
    return;
  }
  status.textContent = `done in ${((performance.now() - t) / 1000).toFixed(2)} s`;
  const s = result.stats;
  table($("gen-stats"), [
    ["agents", s.agents], ["links", s.edges], ["density", s.density.toExponential(3)],
    ["transitivity", s.transitivity.toFixed(4)],
    ["avg path length", `${s.avg_path_length.toFixed(2)} (${s.path_sources} sources)`],
    ["largest component", s.largest_component], ["mean degree", s.mean_degree.toFixed(3)],
    ...s.per_type.map((t) => [t.link_type, `${t.links} links`]),
  ]);
  table($("gen-matching"), [["type", "required", "created", "fallback", "error"],
    ...result.matching.map((m) => [m.link_type, m.required_stubs, m.created_links, m.fallback_links,
      (100 * (m.required_stubs ? 1 - m.satisfied_stubs / m.required_stubs : 0)).toFixed(2) + "%"])]);
  drawEgo(result.ego, result.focus);
}

function drawCurve(points) {
  const svg = $("curve");
  const W = 640, H = 300, L = 50, B = 30, T = 10, R = 130;
  const xs = points.map((p) => Math.log10(p.n));
  const x0 = Math.min(...xs), x1 = Math.max(...xs) + 1e-9;
  const ymax = Math.max(...points.flatMap((p) => [p.matching_error, p.distribution_error]), 1e-6);
  const X = (v) => L + ((Math.log10(v) - x0) / (x1 - x0)) * (W - L - R);
  const Y = (v) => H - B - (v / ymax) * (H - B - T);
  const series = [["matching_error", "#d62728", "matching error"], ["distribution_error", "#1f77b4", "distribution error"]];
  let out = `<line x1="${L}" y1="${H - B}" x2="${W - R}" y2="${H - B}" stroke="#888"/>` +
    `<line x1="${L}" y1="${T}" x2="${L}" y2="${H - B}" stroke="#888"/>` +
    `<text x="${L - 6}" y="${T + 10}" text-anchor="end" font-size="11">${ymax.toFixed(3)}</text>` +
    `<text x="${L - 6}" y="${H - B}" text-anchor="end" font-size="11">0</text>`;
  for (const p of points) {
    out += `<text x="${X(p.n)}" y="${H - 10}" text-anchor="middle" font-size="11">${p.n}</text>`;
  }
  series.forEach(([key, colour, name], i) => {
    const d = points.map((p, j) => `${j ? "L" : "M"}${X(p.n)},${Y(p[key])}`).join(" ");
    out += `<path d="${d}" fill="none" stroke="${colour}" stroke-width="2"/>`;
    out += points.map((p) => `<circle cx="${X(p.n)}" cy="${Y(p[key])}" r="3" fill="${colour}"/>`).join("");
    out += `<text x="${W - R + 10}" y="${T + 14 + i * 16}" font-size="12" fill="${colour}">${name}</text>`;
  });
  svg.innerHTML = out;
}

async function runCurve() {
  const sizes = $("curve-sizes").value.split(",").map((s) => Number(s.trim())).filter((n) => n > 0);
  const seeds = Number($("curve-seeds").value);
  const status = $("curve-status");
  status.textContent = "running...";
  status.className = "";
  const result = JSON.parse(await later(() => errorCurve(new Uint32Array(sizes), seeds)));
  if (result.error) {
    status.textContent = result.error;
    status.className = "error";
    return;
  }
  status.textContent = "";
  drawCurve(result);
}

await init();
const vars = JSON.parse(variables());
setupEvidence(vars);
updatePosterior(vars);
$("gen-run").addEventListener("click", runGenerate);
$("curve-run").addEventListener("click", runCurve);
runGenerate();
