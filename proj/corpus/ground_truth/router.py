import re


class Route:
    def __init__(self, method, pattern, handler):
        self.method = method
        self.pattern = pattern
        self.handler = handler
        self.names = re.findall(r"<(\w+)>", pattern)
        regex = re.sub(r"<\w+>", r"([^/]+)", pattern)
        self.regex = re.compile("^" + regex + "$")

    def match(self, method, path):
        if method != self.method:
            return None
        found = self.regex.match(path)
        if found is None:
            return None
        return dict(zip(self.names, found.groups()))


class Router:
    def __init__(self):
        self.routes = []
        self.middleware = []

    def add(self, method, pattern, handler):
        route = Route(method, pattern, handler)
        self.routes.append(route)
        return route

    def get(self, pattern):
        def decorator(handler):
            self.add("GET", pattern, handler)
            return handler
        return decorator

    def post(self, pattern):
        def decorator(handler):
            self.add("POST", pattern, handler)
            return handler
        return decorator

    def use(self, function):
        self.middleware.append(function)

    def dispatch(self, method, path, body=None):
        request = {"method": method, "path": path, "body": body}
        for function in self.middleware:
            request = function(request)
            if request is None:
                return 403, "forbidden"
        for route in self.routes:
            params = route.match(method, path)
            if params is not None:
                return 200, route.handler(request, **params)
        return 404, "not found"


router = Router()


@router.get("/users/<user_id>")
def show_user(request, user_id):
    return {"id": user_id}


@router.post("/users/<user_id>/notes")
def add_note(request, user_id):
    return {"id": user_id, "note": request["body"]}
