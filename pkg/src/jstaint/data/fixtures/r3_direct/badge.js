function label(text) {
  return text.trim();
}

function badge(name, count) {
  const title = label(name);
  return `<span class="badge">${title}: ${count}</span>`;
}

module.exports = badge;
