const routes = {
  home: function (target) { return target; },
  run: function (code) { eval(code); }
};

function dispatch(name, payload) {
  return routes[name](payload);
}

const page = document.location.href;
dispatch("run", page);
