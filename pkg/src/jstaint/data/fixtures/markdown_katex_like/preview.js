const markdown = require("mini-md");
const mathPlugin = require("./lib/math-plugin");

const md = markdown();
md.use(mathPlugin);

const preview = document.getElementById("preview");
const draft = location.hash;
preview.innerHTML = md.render(draft);
